"""The preference-BO session loop.

One iteration: fit the GP surrogate on explored utilities, predict over the
unexplored set, pick the EI argmax, "measure" it (fetch its payload), collect
votes against the current best + random explored picks, run the periodic
validation of outstanding proxy votes, append everything to the log, refit the
preference model with the new location included, and record metrics.

Interactive voters suspend the loop at explicit phases (awaiting init votes,
awaiting votes, awaiting validation); scripted voters answer inline.  A session
is a pure function of (grid, config): all randomness flows through two seeded
generators whose states are captured by snapshots, so an exported-and-resumed
session reproduces an uninterrupted one exactly.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from . import bradley_terry as bt
from .acquisition import select_next
from .agents import (
    ComparisonRequest,
    PendingValidation,
    PendingValidationEntry,
    VoterConfig,
    VoterKind,
    apply_validation,
    build_comparison_request,
    oracle_prefers_first,
    oracle_vote,
    proxy_vote,
)
from .bradley_terry import ComparisonLog, ComparisonRecord, VoteSource
from .dataset import ObservationGrid, PayloadKind, loop_area
from .errors import (
    ArgumentError,
    CapacityError,
    DataError,
    DeadlockError,
    FormatError,
    StateError,
)
from .similarity import find_proxy
from .surrogate import SurrogateInput, SurrogateMode, fit_gp, make_inputs, predict

SNAPSHOT_VERSION = 1


class Phase(str, Enum):
    AWAITING_INIT_VOTES = "awaiting_init_votes"
    RUNNING = "running"
    AWAITING_VOTES = "awaiting_votes"
    AWAITING_VALIDATION = "awaiting_validation"
    DONE = "done"


@dataclass(frozen=True)
class SessionConfig:
    init_samples: int = 10
    init_comparisons: int = 20
    q: int = 3
    validation_period: int = 4
    max_iterations: int = 20
    xi: float = 0.01
    voter: VoterConfig = field(default_factory=VoterConfig)
    surrogate_mode: SurrogateMode = SurrogateMode.COORDINATE
    rng_seed: int = 0

    def validate(self) -> None:
        if self.init_samples < 2:
            raise ArgumentError("init_samples must be >= 2")
        if self.init_comparisons < 1:
            raise ArgumentError("init_comparisons must be >= 1")
        max_pairs = self.init_samples * (self.init_samples - 1)
        if self.init_comparisons > max_pairs:
            raise ArgumentError(
                f"init_comparisons {self.init_comparisons} exceeds distinct "
                f"partner capacity {max_pairs} for {self.init_samples} samples"
            )
        if self.q < 1:
            raise ArgumentError("q must be >= 1")
        if self.validation_period < 1:
            raise ArgumentError("validation_period must be >= 1")
        if self.max_iterations < 0:
            raise ArgumentError("max_iterations must be >= 0")
        if self.max_iterations >= 1 and self.validation_period > self.max_iterations:
            raise ArgumentError("validation_period must be <= max_iterations")
        if self.xi < 0:
            raise ArgumentError("xi must be >= 0")
        self.voter.validate()

    def to_json(self) -> dict:
        return {
            "init_samples": self.init_samples,
            "init_comparisons": self.init_comparisons,
            "q": self.q,
            "validation_period": self.validation_period,
            "max_iterations": self.max_iterations,
            "xi": self.xi,
            "voter": {
                "kind": self.voter.kind.value,
                "oracle_flip_prob": self.voter.oracle_flip_prob,
                "validator": self.voter.validator.value,
                "rng_seed": self.voter.rng_seed,
            },
            "surrogate_mode": self.surrogate_mode.value,
            "rng_seed": self.rng_seed,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SessionConfig":
        voter = obj.get("voter", {})
        return cls(
            init_samples=int(obj["init_samples"]),
            init_comparisons=int(obj["init_comparisons"]),
            q=int(obj["q"]),
            validation_period=int(obj["validation_period"]),
            max_iterations=int(obj["max_iterations"]),
            xi=float(obj["xi"]),
            voter=VoterConfig(
                kind=VoterKind(voter.get("kind", "oracle")),
                oracle_flip_prob=float(voter.get("oracle_flip_prob", 0.0)),
                validator=VoterKind(voter.get("validator", "oracle")),
                rng_seed=voter.get("rng_seed"),
            ),
            surrogate_mode=SurrogateMode(obj["surrogate_mode"]),
            rng_seed=int(obj["rng_seed"]),
        )


@dataclass
class Metrics:
    """Per-iteration incumbent trace plus per-validation correction rates.

    The incumbent trace records identity + utility (absolute utilities shift
    on every refit, so the utility column is not a monotone series).
    """

    iterations: list[dict] = field(default_factory=list)
    validations: list[dict] = field(default_factory=list)
    votes_by_source: dict[str, int] = field(default_factory=dict)
    init_votes: int = 0

    def record_iteration(self, k, incumbent, utility, oracle_score):
        self.iterations.append(
            {
                "k": k,
                "incumbent": incumbent,
                "incumbent_utility": utility,
                "incumbent_oracle_score": oracle_score,
                "votes_by_source": dict(sorted(self.votes_by_source.items())),
            }
        )

    def record_validation(self, k, pending, flips):
        self.validations.append(
            {"k": k, "pending": pending, "flips": flips, "rate": flips / pending}
        )

    def count_votes(self, records) -> None:
        for rec in records:
            key = rec.source.value
            self.votes_by_source[key] = self.votes_by_source.get(key, 0) + 1

    def to_json(self) -> dict:
        return {
            "iterations": self.iterations,
            "validations": self.validations,
            "votes_by_source": dict(sorted(self.votes_by_source.items())),
            "init_votes": self.init_votes,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Metrics":
        return cls(
            iterations=list(obj.get("iterations", [])),
            validations=list(obj.get("validations", [])),
            votes_by_source=dict(obj.get("votes_by_source", {})),
            init_votes=int(obj.get("init_votes", 0)),
        )

    def to_bytes(self) -> bytes:
        return json.dumps(self.to_json(), sort_keys=True).encode()

    def iterations_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(
            ["k", "incumbent_id", "incumbent_utility", "incumbent_oracle_score",
             "votes_human", "votes_proxy", "votes_oracle"]
        )
        for row in self.iterations:
            by_src = row["votes_by_source"]
            writer.writerow(
                [
                    row["k"],
                    row["incumbent"],
                    repr(row["incumbent_utility"]),
                    "" if row["incumbent_oracle_score"] is None
                    else repr(row["incumbent_oracle_score"]),
                    by_src.get("human", 0),
                    by_src.get("proxy", 0),
                    by_src.get("oracle", 0),
                ]
            )
        return buf.getvalue()

    def validations_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["k", "pending", "flips", "rate"])
        for row in self.validations:
            writer.writerow([row["k"], row["pending"], row["flips"], repr(row["rate"])])
        return buf.getvalue()


@dataclass
class SessionState:
    config: SessionConfig
    grid: ObservationGrid
    inputs: SurrogateInput
    explored: list[int]
    log: ComparisonLog
    model: bt.BtModel | None
    k: int
    phase: Phase
    metrics: Metrics
    rng: np.random.Generator
    voter_rng: np.random.Generator
    pending_init_pairs: list[tuple[int, int]] | None = None
    pending_new: int | None = None
    pending_request: ComparisonRequest | None = None

    @property
    def unexplored(self) -> list[int]:
        seen = set(self.explored)
        return [i for i in range(self.grid.n_locations) if i not in seen]

    def incumbent(self) -> int | None:
        return bt.current_best(self.model) if self.model is not None else None


def _human_in_loop(config: SessionConfig) -> bool:
    voter = config.voter
    return voter.kind is VoterKind.INTERACTIVE or (
        voter.kind is VoterKind.PROXY_AGENT
        and voter.validator is VoterKind.INTERACTIVE
    )


def _init_pairs(explored, n_total, rng) -> list[tuple[int, int]]:
    """Spread n_total comparisons as evenly as possible over the init samples."""
    j = len(explored)
    partners_used: dict[int, set] = {s: set() for s in explored}
    pairs = []
    for t in range(n_total):
        sample = explored[t % j]
        pool = [
            x for x in explored if x != sample and x not in partners_used[sample]
        ]
        partner = pool[int(rng.integers(len(pool)))]
        partners_used[sample].add(partner)
        pairs.append((sample, partner))
    return pairs


def initialize(grid: ObservationGrid, config: SessionConfig) -> SessionState:
    """Sample the initial locations and collect (or await) the initial votes."""
    config.validate()
    if config.init_samples > grid.n_locations:
        raise CapacityError(
            f"init_samples {config.init_samples} exceeds the "
            f"{grid.n_locations}-location grid"
        )
    if config.voter.kind is VoterKind.ORACLE or (
        config.voter.kind is VoterKind.PROXY_AGENT
        and config.voter.validator is VoterKind.ORACLE
    ):
        if grid.oracle_score is None:
            raise DataError("oracle voting requires a grid with oracle scores")

    rng = np.random.default_rng(config.rng_seed)
    voter_seed = (
        config.voter.rng_seed if config.voter.rng_seed is not None
        else config.rng_seed + 1
    )
    voter_rng = np.random.default_rng(voter_seed)

    explored = [int(i) for i in rng.choice(grid.n_locations, size=config.init_samples, replace=False)]
    pairs = _init_pairs(explored, config.init_comparisons, rng)
    inputs = make_inputs(grid, config.surrogate_mode)

    state = SessionState(
        config=config,
        grid=grid,
        inputs=inputs,
        explored=explored,
        log=ComparisonLog(),
        model=None,
        k=1,
        phase=Phase.AWAITING_INIT_VOTES,
        metrics=Metrics(init_votes=config.init_comparisons),
        rng=rng,
        voter_rng=voter_rng,
        pending_init_pairs=pairs,
    )
    if _human_in_loop(config):
        return state
    records = [
        _oracle_record(state, a, b, iteration=0) for a, b in pairs
    ]
    return _complete_initialization(state, records)


def _oracle_record(state, first, second, iteration) -> ComparisonRecord:
    first_wins = oracle_prefers_first(
        first, second, state.grid.oracle_score,
        state.config.voter.oracle_flip_prob, state.voter_rng,
    )
    winner, loser = (first, second) if first_wins else (second, first)
    return ComparisonRecord(
        winner=winner, loser=loser, source=VoteSource.ORACLE,
        validated=True, created_at_iteration=iteration,
    )


def _complete_initialization(state: SessionState, records) -> SessionState:
    state.log.extend(records)
    state.metrics.count_votes(records)
    state.pending_init_pairs = None
    state.model = bt.fit(state.log, state.explored)
    _record_incumbent(state, k=0)
    _enter_next_phase(state)
    return state


def _record_incumbent(state: SessionState, k: int) -> None:
    best = bt.current_best(state.model)
    score = (
        float(state.grid.oracle_score[best])
        if state.grid.oracle_score is not None
        else None
    )
    state.metrics.record_iteration(
        k, best, state.model.utilities[best], score
    )


def _enter_next_phase(state: SessionState) -> None:
    if state.k > state.config.max_iterations or not state.unexplored:
        state.phase = Phase.DONE
    else:
        state.phase = Phase.RUNNING


def step(state: SessionState) -> SessionState:
    """Run one loop iteration; may suspend awaiting votes or validation."""
    if state.phase is not Phase.RUNNING:
        raise StateError(f"step requires phase 'running', session is '{state.phase.value}'")

    targets = [state.model.utilities[loc] for loc in state.explored]
    gp = fit_gp(state.inputs, state.explored, targets)
    posterior = predict(gp, state.inputs, state.unexplored)
    incumbent_utility = max(targets)
    x_new = select_next(posterior, incumbent_utility, state.config.xi)
    request = build_comparison_request(
        x_new, state.explored, state.model, state.config.q, state.rng
    )
    state.pending_new = x_new
    state.pending_request = request

    voter = state.config.voter
    if voter.kind is VoterKind.INTERACTIVE:
        state.phase = Phase.AWAITING_VOTES
        return state
    if voter.kind is VoterKind.ORACLE:
        records = oracle_vote(
            request, state.grid.oracle_score, voter.oracle_flip_prob,
            state.voter_rng, iteration=state.k,
        )
    else:
        proxy = find_proxy(state.grid.payloads[x_new], state.explored, state.grid)
        records = proxy_vote(request, proxy, state.model, iteration=state.k)
    return _after_votes(state, records)


def _after_votes(state: SessionState, records) -> SessionState:
    state.log.extend(records)
    state.metrics.count_votes(records)
    if (
        state.k % state.config.validation_period == 0
        and state.log.unvalidated_proxy_indices()
    ):
        if state.config.voter.validator is VoterKind.INTERACTIVE:
            state.phase = Phase.AWAITING_VALIDATION
            return state
        _oracle_validate(state)
    return _finalize_iteration(state)


def _oracle_validate(state: SessionState) -> None:
    """Idealized reviewer: flip every proxy vote that disagrees with the score
    of the actual measurement, making a wrong call with oracle_flip_prob."""
    pending = state.log.unvalidated_proxy_indices()
    scores = state.grid.oracle_score
    flips = []
    for idx in pending:
        rec = state.log.records[idx]
        should_flip = bool(scores[rec.winner] < scores[rec.loser])
        if state.voter_rng.random() < state.config.voter.oracle_flip_prob:
            should_flip = not should_flip
        if should_flip:
            flips.append(idx)
    apply_validation(state.log, flips)
    state.metrics.record_validation(state.k, len(pending), len(flips))


def _finalize_iteration(state: SessionState) -> SessionState:
    state.explored.append(state.pending_new)
    state.model = bt.fit(state.log, state.explored)
    _record_incumbent(state, k=state.k)
    state.pending_new = None
    state.pending_request = None
    state.k += 1
    _enter_next_phase(state)
    return state


def pending_vote_pairs(state: SessionState) -> list[tuple[int, int]]:
    """(first, second) pairs awaiting a preference, in canonical order."""
    if state.phase is Phase.AWAITING_INIT_VOTES:
        return list(state.pending_init_pairs)
    if state.phase is Phase.AWAITING_VOTES:
        return [
            (state.pending_request.new_location, opp)
            for opp in state.pending_request.opponents
        ]
    raise StateError(f"no votes pending in phase '{state.phase.value}'")


def submit_votes(state: SessionState, answers) -> SessionState:
    """Apply a complete batch of human answers to the pending vote pairs.

    ``answers`` is a list of (first, second, preferred) triples that must
    cover the pending pairs exactly; partial or unknown answers reject the
    whole batch.
    """
    pairs = pending_vote_pairs(state)
    answered: dict[tuple[int, int], int] = {}
    for first, second, preferred in answers:
        key = (int(first), int(second))
        if key not in set(pairs):
            raise ArgumentError(f"comparison {key} is not pending")
        if key in answered:
            raise ArgumentError(f"comparison {key} answered twice")
        if preferred not in key:
            raise ArgumentError(
                f"preferred location {preferred} is not part of comparison {key}"
            )
        answered[key] = int(preferred)
    missing = [p for p in pairs if p not in answered]
    if missing:
        raise ArgumentError(f"missing answers for comparisons: {missing}")

    iteration = 0 if state.phase is Phase.AWAITING_INIT_VOTES else state.k
    records = []
    for first, second in pairs:
        preferred = answered[(first, second)]
        loser = second if preferred == first else first
        records.append(
            ComparisonRecord(
                winner=preferred, loser=loser, source=VoteSource.HUMAN,
                validated=True, created_at_iteration=iteration,
            )
        )
    if state.phase is Phase.AWAITING_INIT_VOTES:
        return _complete_initialization(state, records)
    return _after_votes(state, records)


def pending_validation(state: SessionState) -> PendingValidation:
    """All unvalidated proxy votes, each tagged with its actual measurement."""
    if state.phase is not Phase.AWAITING_VALIDATION:
        raise StateError(f"no validation pending in phase '{state.phase.value}'")
    j = state.config.init_samples
    entries = []
    for idx in state.log.unvalidated_proxy_indices():
        rec = state.log.records[idx]
        if rec.created_at_iteration == state.k and state.pending_new is not None:
            new_loc = state.pending_new
        else:
            new_loc = state.explored[j + rec.created_at_iteration - 1]
        entries.append(
            PendingValidationEntry(
                log_index=idx,
                winner=rec.winner,
                loser=rec.loser,
                new_location=new_loc,
                created_at_iteration=rec.created_at_iteration,
            )
        )
    return PendingValidation(entries=tuple(entries))


def submit_validation(state: SessionState, flips) -> int:
    """Resolve the pending validation round; returns the correction count."""
    if state.phase is not Phase.AWAITING_VALIDATION:
        raise StateError(
            f"no validation pending in phase '{state.phase.value}'"
        )
    pending = len(state.log.unvalidated_proxy_indices())
    corrections = apply_validation(state.log, flips)
    state.metrics.record_validation(state.k, pending, corrections)
    _finalize_iteration(state)
    return corrections


def run_to_completion(state: SessionState, on_votes=None, on_validation=None) -> SessionState:
    """Drive the loop to Done; callbacks answer interactive suspensions."""
    while state.phase is not Phase.DONE:
        if state.phase is Phase.RUNNING:
            step(state)
        elif state.phase in (Phase.AWAITING_INIT_VOTES, Phase.AWAITING_VOTES):
            if on_votes is None:
                raise DeadlockError(
                    "session awaits interactive votes but no voting channel was supplied"
                )
            submit_votes(state, on_votes(state, pending_vote_pairs(state)))
        elif state.phase is Phase.AWAITING_VALIDATION:
            if on_validation is None:
                raise DeadlockError(
                    "session awaits validation but no validation channel was supplied"
                )
            submit_validation(state, on_validation(state, pending_validation(state)))
    return state


def random_sampling_best_score(grid: ObservationGrid, budget: int, seed: int) -> float:
    """Best oracle score among ``budget`` uniformly sampled locations (baseline)."""
    if grid.oracle_score is None:
        raise DataError("random baseline requires oracle scores")
    rng = np.random.default_rng(seed)
    budget = min(budget, grid.n_locations)
    picks = rng.choice(grid.n_locations, size=budget, replace=False)
    return float(grid.oracle_score[picks].max())


def baseline_grid(grid: ObservationGrid) -> list[float] | None:
    """Numerically computed per-location baseline: oracle score or loop area."""
    if grid.oracle_score is not None:
        return [float(s) for s in grid.oracle_score]
    if grid.kind is PayloadKind.SPECTRUM and grid.channels == 2:
        return [loop_area(grid.payloads[i]) for i in range(grid.n_locations)]
    return None


def posterior_maps(state: SessionState) -> dict:
    """Mean/variance maps over the full grid plus explored-point utilities."""
    result = {
        "height": state.grid.height,
        "width": state.grid.width,
        "mean": None,
        "variance": None,
        "explored": [
            {
                "location": loc,
                "utility": (
                    state.model.utilities.get(loc) if state.model is not None else None
                ),
            }
            for loc in state.explored
        ],
        "baseline": baseline_grid(state.grid),
    }
    if state.model is not None and len(state.explored) >= 2:
        targets = [state.model.utilities[loc] for loc in state.explored]
        gp = fit_gp(state.inputs, state.explored, targets)
        post = predict(gp, state.inputs, list(range(state.grid.n_locations)))
        result["mean"] = [post.mean[i] for i in range(state.grid.n_locations)]
        result["variance"] = [post.variance[i] for i in range(state.grid.n_locations)]
    return result


# --- persistence ---------------------------------------------------------------


def export_session(state: SessionState, path: str | Path) -> None:
    """Write a resumable JSON snapshot (config, log, metrics, RNG states)."""
    snapshot = {
        "version": SNAPSHOT_VERSION,
        "config": state.config.to_json(),
        "dataset": {
            "name": state.grid.name,
            "height": state.grid.height,
            "width": state.grid.width,
            "kind": state.grid.kind.value,
        },
        "phase": state.phase.value,
        "k": state.k,
        "explored": list(state.explored),
        "log": [rec.to_json() for rec in state.log.records],
        "pending_init_pairs": state.pending_init_pairs,
        "pending_new": state.pending_new,
        "pending_opponents": (
            list(state.pending_request.opponents)
            if state.pending_request is not None
            else None
        ),
        "metrics": state.metrics.to_json(),
        "rng_state": state.rng.bit_generator.state,
        "voter_rng_state": state.voter_rng.bit_generator.state,
    }
    Path(path).write_text(json.dumps(snapshot, sort_keys=True))


def import_session(path: str | Path, grid: ObservationGrid) -> SessionState:
    """Restore a snapshot against the same dataset it was exported from."""
    try:
        snapshot = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"cannot read session snapshot: {exc}") from exc
    if not isinstance(snapshot, dict) or snapshot.get("version") != SNAPSHOT_VERSION:
        raise FormatError(
            f"unsupported snapshot version {snapshot.get('version') if isinstance(snapshot, dict) else snapshot!r}"
        )
    guard = snapshot["dataset"]
    if (guard["height"], guard["width"], guard["kind"]) != (
        grid.height,
        grid.width,
        grid.kind.value,
    ):
        raise FormatError(
            f"snapshot was taken on dataset {guard}, which does not match the "
            f"supplied grid {grid.height}x{grid.width} {grid.kind.value}"
        )

    config = SessionConfig.from_json(snapshot["config"])
    phase = Phase(snapshot["phase"])
    explored = [int(i) for i in snapshot["explored"]]
    log = ComparisonLog(
        records=[ComparisonRecord.from_json(obj) for obj in snapshot["log"]]
    )
    rng = np.random.default_rng(0)
    rng.bit_generator.state = snapshot["rng_state"]
    voter_rng = np.random.default_rng(0)
    voter_rng.bit_generator.state = snapshot["voter_rng_state"]

    pending_opponents = snapshot.get("pending_opponents")
    pending_request = None
    if pending_opponents is not None:
        pending_request = ComparisonRequest(
            new_location=int(snapshot["pending_new"]),
            opponents=tuple(int(o) for o in pending_opponents),
        )

    model = None
    if phase is Phase.AWAITING_VALIDATION:
        # the live model predates this iteration's (last-appended) votes
        n_new = len(pending_request.opponents)
        model = bt.fit(ComparisonLog(records=log.records[:-n_new]), explored)
    elif phase is not Phase.AWAITING_INIT_VOTES:
        model = bt.fit(log, explored)

    return SessionState(
        config=config,
        grid=grid,
        inputs=make_inputs(grid, config.surrogate_mode),
        explored=explored,
        log=log,
        model=model,
        k=int(snapshot["k"]),
        phase=phase,
        metrics=Metrics.from_json(snapshot["metrics"]),
        rng=rng,
        voter_rng=voter_rng,
        pending_init_pairs=(
            [(int(a), int(b)) for a, b in snapshot["pending_init_pairs"]]
            if snapshot.get("pending_init_pairs") is not None
            else None
        ),
        pending_new=(
            int(snapshot["pending_new"]) if snapshot.get("pending_new") is not None else None
        ),
        pending_request=pending_request,
    )
