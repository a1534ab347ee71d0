"""Vote sources and the periodic validation of proxy votes.

Three voters answer comparison requests: an interactive human (through the
HTTP API), the proxy agent (reuses the fitted preference model through the
most-similar explored location), and a scripted oracle that votes by a known
numerical score (the deterministic stand-in for a human in headless runs).

Vote direction convention: a comparison that favors the new measurement is
recorded as (winner=new_location, loser=opponent).  Exact-tie preferences
resolve in favor of the opponent, so an uninformative comparison never
dethrones the incumbent.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .bradley_terry import (
    BtModel,
    ComparisonLog,
    ComparisonRecord,
    VoteSource,
    current_best,
    preference_probability,
)
from .errors import ArgumentError, ConsistencyError, DataError, StateError


class VoterKind(str, Enum):
    INTERACTIVE = "interactive"
    PROXY_AGENT = "proxy"
    ORACLE = "oracle"


@dataclass(frozen=True)
class VoterConfig:
    """Who casts loop votes, and who stands in for the human when needed.

    ``validator`` answers validation prompts (and initial votes) in proxy-agent
    mode; it must be a human channel: interactive or oracle.
    """

    kind: VoterKind = VoterKind.ORACLE
    oracle_flip_prob: float = 0.0
    validator: VoterKind = VoterKind.ORACLE
    rng_seed: int | None = None

    def validate(self) -> None:
        if not 0.0 <= self.oracle_flip_prob < 0.5:
            raise ArgumentError(
                f"oracle_flip_prob must be in [0, 0.5), got {self.oracle_flip_prob}"
            )
        if self.kind is VoterKind.PROXY_AGENT and self.validator is VoterKind.PROXY_AGENT:
            raise ArgumentError("the proxy agent cannot validate its own votes")


@dataclass(frozen=True)
class ComparisonRequest:
    """New measurement paired against the current best + random explored picks."""

    new_location: int
    opponents: tuple[int, ...]


@dataclass(frozen=True)
class PendingValidationEntry:
    log_index: int
    winner: int
    loser: int
    new_location: int  # the actual measurement the reviewer should look at
    created_at_iteration: int


@dataclass(frozen=True)
class PendingValidation:
    entries: tuple[PendingValidationEntry, ...]


def build_comparison_request(
    new: int, explored, model: BtModel, q: int, rng: np.random.Generator
) -> ComparisonRequest:
    """Current best first, then q-1 uniform picks from the remaining explored."""
    explored = sorted(set(explored))
    if not explored:
        raise StateError("cannot build a comparison request with nothing explored")
    if q < 1:
        raise ArgumentError(f"q must be >= 1, got {q}")
    best = current_best(model)
    pool = [loc for loc in explored if loc != best and loc != new]
    n_extra = min(q - 1, len(pool))
    opponents = [best]
    if n_extra > 0:
        picks = rng.choice(len(pool), size=n_extra, replace=False)
        opponents.extend(pool[i] for i in picks)
    return ComparisonRequest(new_location=new, opponents=tuple(opponents))


def proxy_vote(
    request: ComparisonRequest, proxy: int, model: BtModel, iteration: int = 0
) -> list[ComparisonRecord]:
    """Vote for the new location through its proxy's fitted utility.

    The proxy only supplies the preference estimate; records are attributed to
    the new location itself.
    """
    if proxy not in model.utilities:
        raise ConsistencyError(f"proxy location {proxy} not in fitted model")
    records = []
    for opponent in request.opponents:
        p = preference_probability(model, proxy, opponent)
        if p > 0.5:
            winner, loser = request.new_location, opponent
        else:
            winner, loser = opponent, request.new_location
        records.append(
            ComparisonRecord(
                winner=winner,
                loser=loser,
                source=VoteSource.PROXY,
                validated=False,
                created_at_iteration=iteration,
            )
        )
    return records


def oracle_prefers_first(
    a: int, b: int, scores: np.ndarray, flip_prob: float, rng: np.random.Generator
) -> bool:
    """Scripted preference: higher score wins, ties go to b, flipped w.p. flip_prob."""
    first_wins = bool(scores[a] > scores[b])
    if rng.random() < flip_prob:
        first_wins = not first_wins
    return first_wins


def oracle_vote(
    request: ComparisonRequest,
    scores: np.ndarray | None,
    flip_prob: float,
    rng: np.random.Generator,
    iteration: int = 0,
) -> list[ComparisonRecord]:
    """Score-driven votes with independent per-comparison flip noise."""
    if scores is None:
        raise DataError("oracle voting requires per-location scores")
    records = []
    for opponent in request.opponents:
        if oracle_prefers_first(request.new_location, opponent, scores, flip_prob, rng):
            winner, loser = request.new_location, opponent
        else:
            winner, loser = opponent, request.new_location
        records.append(
            ComparisonRecord(
                winner=winner,
                loser=loser,
                source=VoteSource.ORACLE,
                validated=True,
                created_at_iteration=iteration,
            )
        )
    return records


def apply_validation(log: ComparisonLog, flips) -> int:
    """Resolve one validation round: swap flipped votes, mark all pending as seen.

    Every index in ``flips`` must refer to a currently unvalidated proxy
    record.  Returns the number of corrections applied.
    """
    pending = log.unvalidated_proxy_indices()
    pending_set = set(pending)
    flip_set = set(int(i) for i in flips)
    for idx in sorted(flip_set):
        if idx not in pending_set:
            raise ArgumentError(
                f"log index {idx} is not an unvalidated proxy record"
            )
    for idx in pending:
        rec = log.records[idx]
        if idx in flip_set:
            rec.winner, rec.loser = rec.loser, rec.winner
        rec.validated = True
    return len(flip_set)
