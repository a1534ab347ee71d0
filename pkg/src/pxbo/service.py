"""HTTP JSON API for driving sessions from the voting console.

Sessions live in server memory, keyed by opaque ids.  All mutations of one
session are serialized through its lock (single writer); reads take the same
lock, so every response reflects a completed loop transition.  The pending
queue is pull-based: clients poll GET /pending and answer with one atomic
POST, which either applies completely or not at all.
"""

from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import orchestrator as orc
from .bradley_terry import current_best
from .dataset import ObservationGrid, PayloadKind, load_bundle
from .errors import (
    ArgumentError,
    CapacityError,
    DataError,
    FormatError,
    PxboError,
    StateError,
)
from .orchestrator import Phase, SessionConfig, SessionState


class VoteItem(BaseModel):
    new_location: int
    opponent: int
    preferred: int


class VotesBody(BaseModel):
    votes: list[VoteItem]


class ValidateBody(BaseModel):
    flip: list[int] = []


class CreateSessionBody(BaseModel):
    dataset: str
    config: dict = {}


@dataclass
class ApiSession:
    id: str
    dataset: str
    state: SessionState
    lock: threading.Lock = field(default_factory=threading.Lock)
    created_at: str = ""
    updated_at: str = ""


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _render_payload(grid: ObservationGrid, location: int) -> dict:
    payload = grid.payloads[location]
    if grid.kind is PayloadKind.IMAGE_PATCH:
        return {
            "kind": "image_patch",
            "location": location,
            "shape": list(payload.shape),
            "values": [float(v) for v in payload.reshape(-1)],
        }
    return {
        "kind": "spectrum",
        "location": location,
        "channels": [[float(v) for v in channel] for channel in payload],
    }


def _config_from_request(obj: dict) -> SessionConfig:
    base = SessionConfig().to_json()
    for key, value in obj.items():
        if key == "voter" and isinstance(value, dict):
            base["voter"].update(value)
        elif key not in base:
            raise ArgumentError(f"unknown config field '{key}'")
        else:
            base[key] = value
    config = SessionConfig.from_json(base)
    config.validate()
    return config


def _state_summary(session: ApiSession) -> dict:
    state = session.state
    incumbent = None
    if state.model is not None:
        best = current_best(state.model)
        incumbent = {
            "location": best,
            "utility": state.model.utilities[best],
            "oracle_score": (
                float(state.grid.oracle_score[best])
                if state.grid.oracle_score is not None
                else None
            ),
        }
    return {
        "id": session.id,
        "dataset": session.dataset,
        "phase": state.phase.value,
        "k": state.k,
        "explored_count": len(state.explored),
        "total_locations": state.grid.n_locations,
        "incumbent": incumbent,
        "config": state.config.to_json(),
        "created_at": session.created_at,
        "updated_at": session.updated_at,
    }


def _pending_body(session: ApiSession) -> dict | None:
    state = session.state
    grid = state.grid
    if state.phase in (Phase.AWAITING_INIT_VOTES, Phase.AWAITING_VOTES):
        comparisons = [
            {
                "new_location": a,
                "opponent": b,
                "new_payload": _render_payload(grid, a),
                "opponent_payload": _render_payload(grid, b),
            }
            for a, b in orc.pending_vote_pairs(state)
        ]
        return {"type": "votes", "phase": state.phase.value, "comparisons": comparisons}
    if state.phase is Phase.AWAITING_VALIDATION:
        entries = []
        for e in orc.pending_validation(state).entries:
            opponent = e.loser if e.winner == e.new_location else e.winner
            entries.append(
                {
                    "log_index": e.log_index,
                    "winner": e.winner,
                    "loser": e.loser,
                    "new_location": e.new_location,
                    "opponent": opponent,
                    "new_is_winner": e.winner == e.new_location,
                    "iteration": e.created_at_iteration,
                    "new_payload": _render_payload(grid, e.new_location),
                    "opponent_payload": _render_payload(grid, opponent),
                }
            )
        return {"type": "validation", "phase": state.phase.value, "entries": entries}
    return None


def create_app(
    datasets: dict[str, ObservationGrid] | None = None,
    datasets_root: str | Path | None = None,
    console_origin: str | None = None,
) -> FastAPI:
    app = FastAPI(title="pxbo", version="0.1.0")
    origins = [console_origin] if console_origin else ["*"]
    app.add_middleware(
        CORSMiddleware,
        allow_origins=origins,
        allow_methods=["*"],
        allow_headers=["*"],
    )

    grids: dict[str, ObservationGrid] = dict(datasets or {})
    if datasets_root is not None:
        root = Path(datasets_root)
        for manifest in sorted(root.glob("*/manifest.json")):
            grid = load_bundle(manifest.parent)
            grids[manifest.parent.name] = grid
    sessions: dict[str, ApiSession] = {}

    @app.exception_handler(PxboError)
    def _pxbo_error(request, exc: PxboError):
        if isinstance(exc, StateError):
            status = 409
        elif isinstance(exc, (ArgumentError, FormatError, DataError, CapacityError)):
            status = 422
        else:
            status = 500
        return JSONResponse(status_code=status, content={"detail": str(exc)})

    def _session_or_404(session_id: str) -> ApiSession:
        session = sessions.get(session_id)
        if session is None:
            raise KeyError(session_id)
        return session

    @app.exception_handler(KeyError)
    def _not_found(request, exc: KeyError):
        return JSONResponse(status_code=404, content={"detail": f"unknown id {exc}"})

    @app.get("/datasets")
    def list_datasets():
        return [
            {
                "name": name,
                "height": g.height,
                "width": g.width,
                "kind": g.kind.value,
                "has_oracle_score": g.oracle_score is not None,
            }
            for name, g in sorted(grids.items())
        ]

    @app.get("/sessions")
    def list_sessions():
        return [
            {
                "id": s.id,
                "dataset": s.dataset,
                "phase": s.state.phase.value,
                "k": s.state.k,
            }
            for s in sessions.values()
        ]

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionBody):
        if body.dataset not in grids:
            raise KeyError(body.dataset)
        config = _config_from_request(body.config)
        state = orc.initialize(grids[body.dataset], config)
        session = ApiSession(
            id=uuid.uuid4().hex,
            dataset=body.dataset,
            state=state,
            created_at=_now(),
            updated_at=_now(),
        )
        sessions[session.id] = session
        return _state_summary(session)

    @app.get("/sessions/{session_id}/state")
    def get_state(session_id: str):
        session = _session_or_404(session_id)
        with session.lock:
            return _state_summary(session)

    @app.get("/sessions/{session_id}/pending")
    def get_pending(session_id: str):
        session = _session_or_404(session_id)
        with session.lock:
            return _pending_body(session)

    @app.post("/sessions/{session_id}/votes")
    def post_votes(session_id: str, body: VotesBody):
        session = _session_or_404(session_id)
        with session.lock:
            answers = [(v.new_location, v.opponent, v.preferred) for v in body.votes]
            orc.submit_votes(session.state, answers)
            session.updated_at = _now()
            return {"phase": session.state.phase.value, "k": session.state.k}

    @app.post("/sessions/{session_id}/validate")
    def post_validate(session_id: str, body: ValidateBody):
        session = _session_or_404(session_id)
        with session.lock:
            corrections = orc.submit_validation(session.state, body.flip)
            session.updated_at = _now()
            return {
                "corrections": corrections,
                "phase": session.state.phase.value,
                "k": session.state.k,
            }

    @app.post("/sessions/{session_id}/step")
    def post_step(session_id: str):
        session = _session_or_404(session_id)
        with session.lock:
            if session.state.phase is not Phase.RUNNING:
                raise StateError(
                    f"step requires phase 'running', session is "
                    f"'{session.state.phase.value}'"
                )
            while session.state.phase is Phase.RUNNING:
                orc.step(session.state)
            session.updated_at = _now()
            return {"phase": session.state.phase.value, "k": session.state.k}

    @app.get("/sessions/{session_id}/map")
    def get_map(session_id: str):
        session = _session_or_404(session_id)
        with session.lock:
            return orc.posterior_maps(session.state)

    @app.get("/sessions/{session_id}/metrics")
    def get_metrics(session_id: str):
        session = _session_or_404(session_id)
        with session.lock:
            return session.state.metrics.to_json()

    return app
