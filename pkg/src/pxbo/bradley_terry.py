"""Bradley-Terry preference model over explored grid locations.

Pairwise votes ("winner beats loser") are turned into per-location utilities
(log-strengths) by maximum likelihood under P(i beats j) = e^u_i / (e^u_i + e^u_j).
Comparison graphs are sparse early in a session and often disconnected, so the
likelihood is smoothed with a virtual anchor: every location gets
ANCHOR_PSEUDO_COUNT pseudo-wins and pseudo-losses against a fixed strength-0
opponent.  This keeps every utility finite and leaves never-compared locations
near 0.  Utilities are gauge-fixed to zero mean.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ArgumentError, ConsistencyError

ANCHOR_PSEUDO_COUNT = 0.5
CONVERGENCE_TOL = 1e-8
MAX_SWEEPS = 1000


class VoteSource(str, Enum):
    HUMAN = "human"
    PROXY = "proxy"
    ORACLE = "oracle"


@dataclass
class ComparisonRecord:
    winner: int
    loser: int
    source: VoteSource
    validated: bool
    created_at_iteration: int

    def __post_init__(self):
        if self.winner == self.loser:
            raise ArgumentError(f"comparison pairs location {self.winner} with itself")
        if self.source is not VoteSource.PROXY and not self.validated:
            raise ArgumentError(f"{self.source.value} votes are validated by definition")

    def to_json(self) -> dict:
        return {
            "winner": self.winner,
            "loser": self.loser,
            "source": self.source.value,
            "validated": self.validated,
            "iteration": self.created_at_iteration,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ComparisonRecord":
        return cls(
            winner=int(obj["winner"]),
            loser=int(obj["loser"]),
            source=VoteSource(obj["source"]),
            validated=bool(obj["validated"]),
            created_at_iteration=int(obj["iteration"]),
        )


@dataclass
class ComparisonLog:
    """Ordered vote records; append-only except for validation flips."""

    records: list[ComparisonRecord] = field(default_factory=list)

    def append(self, record: ComparisonRecord) -> None:
        self.records.append(record)

    def extend(self, records) -> None:
        self.records.extend(records)

    def unvalidated_proxy_indices(self) -> list[int]:
        return [
            i
            for i, rec in enumerate(self.records)
            if rec.source is VoteSource.PROXY and not rec.validated
        ]

    def __len__(self) -> int:
        return len(self.records)

    def to_jsonl(self) -> str:
        return "\n".join(json.dumps(rec.to_json()) for rec in self.records)

    @classmethod
    def from_jsonl(cls, text: str) -> "ComparisonLog":
        records = [
            ComparisonRecord.from_json(json.loads(line))
            for line in text.splitlines()
            if line.strip()
        ]
        return cls(records=records)


@dataclass(frozen=True)
class BtModel:
    """Fitted utilities; immutable.  Mean utility is 0 by gauge convention."""

    utilities: dict[int, float]
    fitted_on: int
    converged: bool
    iterations_used: int


def fit(log: ComparisonLog, locations) -> BtModel:
    """Fit utilities by the minorize-maximize iteration with anchor smoothing.

    Pure function of (log, locations): identical inputs give bit-identical
    utilities (cold start, fixed sweep order, zero-mean renormalization each
    sweep).
    """
    ids = sorted(set(locations))
    if not ids:
        raise ArgumentError("cannot fit a Bradley-Terry model on an empty location set")
    index = {loc: i for i, loc in enumerate(ids)}
    for rec in log.records:
        for loc in (rec.winner, rec.loser):
            if loc not in index:
                raise ConsistencyError(f"comparison references unknown location {loc}")

    n = len(ids)
    wins = np.zeros(n)
    pair_games: dict[tuple[int, int], int] = {}
    for rec in log.records:
        i, j = index[rec.winner], index[rec.loser]
        wins[i] += 1.0
        key = (i, j) if i < j else (j, i)
        pair_games[key] = pair_games.get(key, 0) + 1
    if pair_games:
        keys = sorted(pair_games)
        ip = np.array([k[0] for k in keys])
        jp = np.array([k[1] for k in keys])
        games = np.array([pair_games[k] for k in keys], dtype=np.float64)
    else:
        ip = jp = games = None

    alpha = ANCHOR_PSEUDO_COUNT
    numer = wins + alpha
    u = np.zeros(n)
    converged = False
    sweeps = 0
    for sweeps in range(1, MAX_SWEEPS + 1):
        strength = np.exp(u)
        denom = 2.0 * alpha / (strength + 1.0)
        if ip is not None:
            contrib = games / (strength[ip] + strength[jp])
            denom += np.bincount(ip, weights=contrib, minlength=n)
            denom += np.bincount(jp, weights=contrib, minlength=n)
        u_new = np.log(numer / denom)
        u_new -= u_new.mean()
        delta = float(np.max(np.abs(u_new - u)))
        u = u_new
        if delta < CONVERGENCE_TOL:
            converged = True
            break

    utilities = {loc: float(u[index[loc]]) for loc in ids}
    return BtModel(
        utilities=utilities,
        fitted_on=len(log.records),
        converged=converged,
        iterations_used=sweeps,
    )


def preference_probability(model: BtModel, a: int, b: int) -> float:
    """P(a preferred over b); stable for arbitrarily large utility gaps."""
    for loc in (a, b):
        if loc not in model.utilities:
            raise ConsistencyError(f"location {loc} not in fitted model")
    ua, ub = model.utilities[a], model.utilities[b]
    m = max(ua, ub)
    ea = np.exp(ua - m)
    eb = np.exp(ub - m)
    return float(ea / (ea + eb))


def current_best(model: BtModel) -> int:
    """Location with maximal utility; ties go to the lowest index."""
    if not model.utilities:
        raise ArgumentError("model has no locations")
    best = None
    for loc in sorted(model.utilities):
        if best is None or model.utilities[loc] > model.utilities[best]:
            best = loc
    return best
