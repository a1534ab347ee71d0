"""Gaussian-process surrogate over grid locations.

Inputs are either normalized (row, col) coordinates or a fixed 8-dimensional
linear projection of the payloads (principal directions of the full grid,
deterministic sign convention).  Hyperparameters are selected by maximizing the
log marginal likelihood over a fixed log-spaced grid followed by one round of
coordinate refinement at half the grid step, so a fit is a deterministic
function of its inputs.  Targets are standardized before fitting and
predictions are transformed back.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.linalg import cho_solve, cholesky, solve_triangular
from scipy.spatial.distance import cdist

from .dataset import ObservationGrid
from .errors import ArgumentError, ConditioningError

FEATURE_DIM = 8
JITTER_LADDER = (0.0, 1e-6, 1e-4, 1e-2)
LENGTHSCALE_GRID_POINTS = 16
LENGTHSCALE_SPAN = (0.01, 3.0)  # multiples of the input scale
SIGNAL_VAR_GRID = (0.25, 1.0, 4.0)
NOISE_VAR_GRID = (1e-6, 1e-4, 1e-2, 1e-1)


class SurrogateMode(str, Enum):
    COORDINATE = "coord"
    FEATURE = "feature"


@dataclass(frozen=True)
class SurrogateInput:
    """One input vector per grid location, row i for flat location i."""

    mode: SurrogateMode
    vectors: np.ndarray

    def restrict(self, ids) -> np.ndarray:
        return self.vectors[np.asarray(list(ids), dtype=int)]


@dataclass(frozen=True)
class Posterior:
    mean: dict[int, float]
    variance: dict[int, float]


def make_inputs(grid: ObservationGrid, mode: SurrogateMode) -> SurrogateInput:
    if grid.height == 1 or grid.width == 1:
        raise ArgumentError("grid has a degenerate axis; coordinates cannot be scaled")
    n = grid.n_locations
    if mode is SurrogateMode.COORDINATE:
        idx = np.arange(n)
        rows = (idx // grid.width) / (grid.height - 1)
        cols = (idx % grid.width) / (grid.width - 1)
        vectors = np.stack([rows, cols], axis=1)
    else:
        flat = grid.payloads.reshape(n, -1).astype(np.float64)
        centered = flat - flat.mean(axis=0)
        _, _, vt = np.linalg.svd(centered, full_matrices=False)
        d = min(FEATURE_DIM, vt.shape[0])
        directions = vt[:d].copy()
        for row in directions:
            peak = np.argmax(np.abs(row))
            if row[peak] < 0:
                row *= -1.0
        vectors = centered @ directions.T
    return SurrogateInput(mode=mode, vectors=vectors)


def _sq_dists(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return cdist(a, b, "sqeuclidean")


def _kernel(sq_dists: np.ndarray, lengthscale: float, signal_var: float) -> np.ndarray:
    return signal_var * np.exp(-sq_dists / (2.0 * lengthscale**2))


def _chol_with_jitter(k_train: np.ndarray) -> tuple[np.ndarray, float]:
    for jitter in JITTER_LADDER:
        try:
            mat = k_train if jitter == 0.0 else k_train + jitter * np.eye(len(k_train))
            return cholesky(mat, lower=True), jitter
        except np.linalg.LinAlgError:
            continue
    raise ConditioningError(
        f"kernel matrix not positive definite after jitter up to {JITTER_LADDER[-1]}"
    )


def _log_marginal_likelihood(
    sq_dists: np.ndarray, y: np.ndarray, lengthscale, signal_var, noise_var
) -> float:
    k = _kernel(sq_dists, lengthscale, signal_var) + noise_var * np.eye(len(y))
    try:
        low = cholesky(k, lower=True)
    except np.linalg.LinAlgError:
        return -np.inf
    alpha = cho_solve((low, True), y)
    return float(
        -0.5 * y @ alpha
        - np.sum(np.log(np.diag(low)))
        - 0.5 * len(y) * np.log(2.0 * np.pi)
    )


@dataclass(frozen=True)
class GpModel:
    train_x: np.ndarray
    train_y: np.ndarray
    y_mean: float
    y_std: float
    lengthscale: float
    signal_var: float
    noise_var: float
    jitter: float
    chol: np.ndarray
    alpha: np.ndarray
    search_log: tuple  # (lengthscale, signal_var, noise_var, lml) per evaluation


def fit_gp_fixed(
    train_x: np.ndarray,
    train_y: np.ndarray,
    lengthscale: float,
    signal_var: float,
    noise_var: float,
    search_log: tuple = (),
) -> GpModel:
    """Build the posterior machinery at fixed hyperparameters."""
    train_x = np.atleast_2d(np.asarray(train_x, dtype=np.float64))
    train_y = np.asarray(train_y, dtype=np.float64)
    y_mean = float(train_y.mean())
    y_std = float(train_y.std())
    if y_std < 1e-12:
        y_std = 1.0
    y_n = (train_y - y_mean) / y_std
    k = _kernel(_sq_dists(train_x, train_x), lengthscale, signal_var)
    k += noise_var * np.eye(len(train_x))
    low, jitter = _chol_with_jitter(k)
    alpha = cho_solve((low, True), y_n)
    return GpModel(
        train_x=train_x,
        train_y=train_y,
        y_mean=y_mean,
        y_std=y_std,
        lengthscale=lengthscale,
        signal_var=signal_var,
        noise_var=noise_var,
        jitter=jitter,
        chol=low,
        alpha=alpha,
        search_log=search_log,
    )


def fit_gp(inputs: SurrogateInput, explored, targets) -> GpModel:
    """Fit hyperparameters by grid search + one coordinate-refinement round."""
    explored = list(explored)
    if len(explored) < 2:
        raise ArgumentError("fitting a surrogate needs at least 2 explored locations")
    y = np.asarray(list(targets), dtype=np.float64)
    if len(y) != len(explored):
        raise ArgumentError("one target per explored location required")
    if not np.all(np.isfinite(y)):
        raise ArgumentError("targets must be finite")

    x = inputs.restrict(explored)
    sq = _sq_dists(x, x)
    # the lengthscale grid is expressed in units of the data spread
    input_scale = float(np.sqrt(sq.max()))
    if input_scale <= 0.0:
        input_scale = 1.0

    y_mean = y.mean()
    y_std = y.std()
    y_n = (y - y_mean) / (y_std if y_std >= 1e-12 else 1.0)

    lengthscales = np.geomspace(
        LENGTHSCALE_SPAN[0] * input_scale,
        LENGTHSCALE_SPAN[1] * input_scale,
        LENGTHSCALE_GRID_POINTS,
    )
    evaluations = []
    best = None  # (lml, lengthscale, signal_var, noise_var)
    for ls in lengthscales:
        for sv in SIGNAL_VAR_GRID:
            for nv in NOISE_VAR_GRID:
                lml = _log_marginal_likelihood(sq, y_n, ls, sv, nv)
                evaluations.append((float(ls), float(sv), float(nv), lml))
                if best is None or lml > best[0]:
                    best = (lml, float(ls), float(sv), float(nv))
    if best is None or not np.isfinite(best[0]):
        raise ConditioningError("no hyperparameter configuration could be factorized")

    # one refinement pass per hyperparameter at half the grid step (log space)
    step_ls = np.exp(
        0.5 * np.log(LENGTHSCALE_SPAN[1] / LENGTHSCALE_SPAN[0]) / (LENGTHSCALE_GRID_POINTS - 1)
    )
    step_sv = 2.0  # half of the x4 grid spacing
    step_nv = np.sqrt(10.0)  # half of the smallest (x10) grid spacing
    for param_idx, factor in ((1, step_ls), (2, step_sv), (3, step_nv)):
        for direction in (1.0 / factor, factor):
            cand = list(best[1:])
            cand[param_idx - 1] *= direction
            lml = _log_marginal_likelihood(sq, y_n, *cand)
            evaluations.append((cand[0], cand[1], cand[2], lml))
            if lml > best[0]:
                best = (lml, *cand)

    return fit_gp_fixed(
        x, y, best[1], best[2], best[3], search_log=tuple(evaluations)
    )


def predict_arrays(model: GpModel, query_x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Posterior mean and variance (original target units) at raw input rows."""
    query_x = np.atleast_2d(np.asarray(query_x, dtype=np.float64))
    k_star = _kernel(
        _sq_dists(model.train_x, query_x), model.lengthscale, model.signal_var
    )
    mean_n = k_star.T @ model.alpha
    v = solve_triangular(model.chol, k_star, lower=True)
    var_n = np.maximum(model.signal_var - np.sum(v * v, axis=0), 0.0)
    mean = mean_n * model.y_std + model.y_mean
    var = var_n * model.y_std**2
    return mean, var


def predict(model: GpModel, inputs: SurrogateInput, query_ids) -> Posterior:
    """Posterior over the given (unexplored) location ids."""
    ids = list(query_ids)
    mean, var = predict_arrays(model, inputs.restrict(ids))
    return Posterior(
        mean={loc: float(m) for loc, m in zip(ids, mean)},
        variance={loc: float(v) for loc, v in zip(ids, var)},
    )
