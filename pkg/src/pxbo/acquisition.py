"""Expected-improvement acquisition over the discrete unexplored set."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ArgumentError
from .surrogate import Posterior

DEFAULT_XI = 0.01
TIE_TOL = 1e-12


def _norm_cdf(z: float) -> float:
    # erfc-based form avoids cancellation deep in the tails
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


def _norm_pdf(z: float) -> float:
    return math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)


def expected_improvement(
    mean: float, variance: float, incumbent: float, xi: float = DEFAULT_XI
) -> float:
    """Expected utility gain over incumbent + xi; exactly 0 at zero variance."""
    for name, value in (("mean", mean), ("variance", variance), ("incumbent", incumbent), ("xi", xi)):
        if not math.isfinite(value):
            raise ArgumentError(f"{name} must be finite, got {value}")
    if variance < 0:
        raise ArgumentError(f"variance must be >= 0, got {variance}")
    if xi < 0:
        raise ArgumentError(f"xi must be >= 0, got {xi}")
    if variance == 0.0:
        return 0.0
    sigma = math.sqrt(variance)
    gap = mean - incumbent - xi
    z = gap / sigma
    return max(0.0, gap * _norm_cdf(z) + sigma * _norm_pdf(z))


@dataclass(frozen=True)
class AcquisitionField:
    values: dict[int, float]
    xi: float
    incumbent: float


def acquisition_field(
    posterior: Posterior, incumbent: float, xi: float = DEFAULT_XI
) -> AcquisitionField:
    values = {
        loc: expected_improvement(posterior.mean[loc], posterior.variance[loc], incumbent, xi)
        for loc in sorted(posterior.mean)
    }
    return AcquisitionField(values=values, xi=xi, incumbent=incumbent)


def select_next(posterior: Posterior, incumbent: float, xi: float = DEFAULT_XI) -> int:
    """Argmax of EI; near-ties resolved by higher variance, then lower index."""
    if not posterior.mean:
        raise ArgumentError("select_next requires a nonempty posterior")
    field = acquisition_field(posterior, incumbent, xi)
    top = max(field.values.values())
    tied = [loc for loc, v in field.values.items() if top - v <= TIE_TOL]
    tied.sort(key=lambda loc: (-posterior.variance[loc], loc))
    return tied[0]
