"""Structural similarity between observation payloads; proxy-location lookup.

The similarity index follows the standard mean-local-SSIM construction with a
uniform 7-point window, sample-covariance normalization, and edge cropping of
half the window, evaluated at float64.  Images use a 7x7 window; spectra use a
length-7 window per channel with the channel scores averaged.  The score is 1.0
exactly for identical inputs and lies in [-1, 1] for all finite inputs.
"""

from __future__ import annotations

import numpy as np
from scipy.ndimage import uniform_filter

from .dataset import ObservationGrid, PayloadKind
from .errors import ArgumentError

WINDOW = 7
K1 = 0.01
K2 = 0.03


def _ssim_plane(a: np.ndarray, b: np.ndarray, data_range: float) -> float:
    if min(a.shape) < WINDOW:
        raise ArgumentError(
            f"payload shape {a.shape} is smaller than the {WINDOW}-point window"
        )
    n_pts = WINDOW**a.ndim
    cov_norm = n_pts / (n_pts - 1)

    ux = uniform_filter(a, size=WINDOW)
    uy = uniform_filter(b, size=WINDOW)
    uxx = uniform_filter(a * a, size=WINDOW)
    uyy = uniform_filter(b * b, size=WINDOW)
    uxy = uniform_filter(a * b, size=WINDOW)
    vx = cov_norm * (uxx - ux * ux)
    vy = cov_norm * (uyy - uy * uy)
    vxy = cov_norm * (uxy - ux * uy)

    c1 = (K1 * data_range) ** 2
    c2 = (K2 * data_range) ** 2
    score = ((2 * ux * uy + c1) * (2 * vxy + c2)) / (
        (ux**2 + uy**2 + c1) * (vx + vy + c2)
    )

    pad = (WINDOW - 1) // 2
    interior = score[tuple(slice(pad, s - pad) for s in score.shape)]
    return float(interior.mean(dtype=np.float64))


def ssim(a, b, data_range: float, channel_axis: int | None = None) -> float:
    """Mean structural similarity of two payloads of identical shape.

    ``channel_axis`` marks the channel dimension of multichannel payloads
    (e.g. 0 for a (channels, L) spectrum); channels are scored independently
    and averaged.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ArgumentError(f"payload shapes differ: {a.shape} vs {b.shape}")
    if data_range <= 0:
        raise ArgumentError(f"data_range must be > 0, got {data_range}")
    if channel_axis is not None:
        nch = a.shape[channel_axis]
        per_channel = [
            _ssim_plane(
                np.take(a, ch, axis=channel_axis),
                np.take(b, ch, axis=channel_axis),
                data_range,
            )
            for ch in range(nch)
        ]
        return float(np.mean(per_channel))
    return _ssim_plane(a, b, data_range)


def payload_similarity(a, b, grid: ObservationGrid) -> float:
    """Similarity of two payloads using the grid's kind and data range."""
    axis = 0 if grid.kind is PayloadKind.SPECTRUM else None
    return ssim(a, b, grid.data_range, channel_axis=axis)


def find_proxy(new_payload, explored, grid: ObservationGrid) -> int:
    """Explored location most structurally similar to the new measurement.

    Ties break to the lowest location index; the result does not depend on the
    iteration order of ``explored``.
    """
    candidates = sorted(set(explored))
    if not candidates:
        raise ArgumentError("find_proxy requires at least one explored location")
    new_payload = np.asarray(new_payload)
    if new_payload.shape != grid.payload_shape:
        raise ArgumentError(
            f"payload shape {new_payload.shape} does not match grid payloads "
            f"{grid.payload_shape}"
        )
    best_loc = None
    best_score = -np.inf
    for loc in candidates:
        score = payload_similarity(new_payload, grid.payloads[loc], grid)
        if score > best_score:
            best_loc, best_score = loc, score
    return best_loc
