"""Exploration datasets: bundle I/O, the synthetic domain-wall grid, and loop area.

A dataset is a dense H x W grid of observation payloads, either square image
patches or multichannel spectra.  Grids are immutable after construction and
are shared read-only by the optimization loop, the voting agents, and the API.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import ArgumentError, DataError, FormatError, SizeError

__all__ = [
    "PayloadKind",
    "ObservationGrid",
    "loc_to_rc",
    "rc_to_loc",
    "load_bundle",
    "write_bundle",
    "generate_domain_wall_grid",
    "domain_wall_image",
    "domain_wall_score",
    "loop_area",
    "WALL_CENTER_LATENT",
]


class PayloadKind(str, Enum):
    IMAGE_PATCH = "image_patch"
    SPECTRUM = "spectrum"


def loc_to_rc(index: int, width: int) -> tuple[int, int]:
    """Flat location index -> (row, col)."""
    return index // width, index % width


def rc_to_loc(row: int, col: int, width: int) -> int:
    return row * width + col


def _compute_data_range(payloads: np.ndarray) -> float:
    rng = float(payloads.max() - payloads.min())
    # all-constant grids get a unit range by convention so SSIM stays defined
    return rng if rng > 0.0 else 1.0


@dataclass(frozen=True)
class ObservationGrid:
    """Dense exploration grid; ``payloads[i]`` is the observation at flat index i.

    Image grids store payloads with shape (N, w, w); spectrum grids with shape
    (N, channels, L).  ``data_range`` is the grid-wide max-min, shared by all
    similarity computations for a stable scale across the session.
    """

    height: int
    width: int
    kind: PayloadKind
    payloads: np.ndarray
    data_range: float
    oracle_score: np.ndarray | None = None
    name: str = "unnamed"

    def __post_init__(self):
        n = self.height * self.width
        if self.payloads.shape[0] != n:
            raise ArgumentError(
                f"payload count {self.payloads.shape[0]} != height*width {n}"
            )
        if self.kind is PayloadKind.IMAGE_PATCH and self.payloads.ndim != 3:
            raise ArgumentError("image_patch payloads must have shape (N, w, w)")
        if self.kind is PayloadKind.SPECTRUM and self.payloads.ndim != 3:
            raise ArgumentError("spectrum payloads must have shape (N, channels, L)")
        if self.data_range <= 0.0:
            raise ArgumentError(f"data_range must be > 0, got {self.data_range}")
        if self.oracle_score is not None:
            if self.oracle_score.shape != (n,):
                raise ArgumentError(
                    f"oracle_score length {self.oracle_score.shape} != {n}"
                )
            if not np.all(np.isfinite(self.oracle_score)):
                bad = int(np.flatnonzero(~np.isfinite(self.oracle_score))[0])
                raise DataError(f"oracle_score has non-finite value at location {bad}")
        self.payloads.setflags(write=False)
        if self.oracle_score is not None:
            self.oracle_score.setflags(write=False)

    @property
    def n_locations(self) -> int:
        return self.height * self.width

    @property
    def payload_shape(self) -> tuple[int, ...]:
        return self.payloads.shape[1:]

    @property
    def patch_window(self) -> int | None:
        if self.kind is PayloadKind.IMAGE_PATCH:
            return int(self.payloads.shape[1])
        return None

    @property
    def channels(self) -> int | None:
        if self.kind is PayloadKind.SPECTRUM:
            return int(self.payloads.shape[1])
        return None

    @property
    def spectrum_length(self) -> int | None:
        if self.kind is PayloadKind.SPECTRUM:
            return int(self.payloads.shape[2])
        return None


def _require_field(manifest: dict, name: str):
    cur = manifest
    for part in name.split("."):
        if not isinstance(cur, dict) or part not in cur:
            raise FormatError(f"manifest missing required field '{name}'")
        cur = cur[part]
    return cur


def _read_f32(path: Path, expected_elements: int, what: str) -> np.ndarray:
    if not path.is_file():
        raise FormatError(f"{what} file not found: {path}")
    raw = path.read_bytes()
    expected_bytes = expected_elements * 4
    if len(raw) != expected_bytes:
        raise SizeError(
            f"{what} file {path.name}: expected {expected_bytes} bytes, "
            f"actual {len(raw)}"
        )
    return np.frombuffer(raw, dtype="<f4").copy()


def load_bundle(path: str | Path) -> ObservationGrid:
    """Load a dataset bundle directory (manifest.json + raw float32 files)."""
    root = Path(path)
    manifest_path = root / "manifest.json"
    if not manifest_path.is_file():
        raise FormatError(f"manifest.json not found in {root}")
    try:
        manifest = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"manifest.json is not valid JSON: {exc}") from exc

    name = _require_field(manifest, "name")
    height = int(_require_field(manifest, "height"))
    width = int(_require_field(manifest, "width"))
    kind_str = _require_field(manifest, "kind")
    try:
        kind = PayloadKind(kind_str)
    except ValueError:
        raise FormatError(
            f"manifest field 'kind' must be 'image_patch' or 'spectrum', got {kind_str!r}"
        ) from None
    if height < 1 or width < 1:
        raise FormatError("manifest fields 'height'/'width' must be >= 1")

    if kind is PayloadKind.IMAGE_PATCH:
        w = int(_require_field(manifest, "patch_window"))
        payload_shape = (w, w)
    else:
        length = int(_require_field(manifest, "spectrum_length"))
        channels = int(_require_field(manifest, "channels"))
        payload_shape = (channels, length)

    n = height * width
    payloads_rel = _require_field(manifest, "files.payloads")
    flat = _read_f32(root / payloads_rel, n * int(np.prod(payload_shape)), "payloads")
    if not np.all(np.isfinite(flat)):
        bad = int(np.flatnonzero(~np.isfinite(flat))[0])
        loc = bad // int(np.prod(payload_shape))
        raise DataError(
            f"payloads contain a non-finite value at element {bad} (location {loc})"
        )
    payloads = flat.reshape((n,) + payload_shape)

    oracle_score = None
    files = manifest.get("files", {})
    if isinstance(files, dict) and files.get("oracle_score"):
        scores = _read_f32(root / files["oracle_score"], n, "oracle_score")
        if not np.all(np.isfinite(scores)):
            bad = int(np.flatnonzero(~np.isfinite(scores))[0])
            raise DataError(f"oracle_score has non-finite value at location {bad}")
        oracle_score = scores.astype(np.float64)

    data_range = manifest.get("data_range")
    if data_range is None:
        data_range = _compute_data_range(payloads)

    return ObservationGrid(
        height=height,
        width=width,
        kind=kind,
        payloads=payloads,
        data_range=float(data_range),
        oracle_score=oracle_score,
        name=str(name),
    )


def write_bundle(grid: ObservationGrid, path: str | Path) -> Path:
    """Write ``grid`` as a bundle directory; inverse of :func:`load_bundle`."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    manifest = {
        "name": grid.name,
        "height": grid.height,
        "width": grid.width,
        "kind": grid.kind.value,
        "data_range": grid.data_range,
        "files": {"payloads": "payloads.f32"},
    }
    if grid.kind is PayloadKind.IMAGE_PATCH:
        manifest["patch_window"] = grid.patch_window
    else:
        manifest["spectrum_length"] = grid.spectrum_length
        manifest["channels"] = grid.channels
    (root / "payloads.f32").write_bytes(
        np.ascontiguousarray(grid.payloads, dtype="<f4").tobytes()
    )
    if grid.oracle_score is not None:
        manifest["files"]["oracle_score"] = "oracle_score.f32"
        (root / "oracle_score.f32").write_bytes(
            np.ascontiguousarray(grid.oracle_score, dtype="<f4").tobytes()
        )
    (root / "manifest.json").write_text(json.dumps(manifest, indent=2))
    return root


# --- synthetic domain-wall grid ------------------------------------------------
#
# Each grid location maps to a latent t in [0, 1] (flat index, normalized).
# The payload is a two-phase (+1/-1) image whose single wall drifts off-center
# and bows as t moves away from WALL_CENTER_LATENT; beyond SECOND_WALL_LATENT a
# second wall appears.  The quality score penalizes off-center walls, curvature,
# and any extra wall, so its unique maximum sits at the latent nearest to
# WALL_CENTER_LATENT.  The latent anchor is irrational, so grid latents (which
# are rational) can never tie in distance to it.

WALL_CENTER_LATENT = (3.0 - math.sqrt(5.0)) / 2.0
WALL_OFFSET_GAIN = 0.35  # wall-center displacement, fraction of width per unit latent distance
WALL_CURVE_GAIN = 0.25  # sideways bow amplitude, fraction of width per unit latent distance
SECOND_WALL_LATENT = 0.82
SECOND_WALL_POS = 0.18  # x position of the second wall, fraction of width
SCORE_OFFCENTER_WEIGHT = 40.0
SCORE_CURVE_WEIGHT = 60.0
SCORE_EXTRA_WALL_WEIGHT = 2.0


def _wall_offset(t: float) -> float:
    return WALL_OFFSET_GAIN * abs(t - WALL_CENTER_LATENT)


def _wall_curvature(t: float) -> float:
    return WALL_CURVE_GAIN * abs(t - WALL_CENTER_LATENT)


def _extra_wall_count(t: float) -> int:
    return 1 if t > SECOND_WALL_LATENT else 0


def domain_wall_score(t: float) -> float:
    """Image quality score of latent t; maximal (== 1) at WALL_CENTER_LATENT."""
    return math.exp(
        -SCORE_OFFCENTER_WEIGHT * _wall_offset(t) ** 2
        - SCORE_CURVE_WEIGHT * _wall_curvature(t) ** 2
        - SCORE_EXTRA_WALL_WEIGHT * _extra_wall_count(t)
    )


def domain_wall_image(t: float, side: int) -> np.ndarray:
    """Noise-free two-phase image for latent t, values in {-1, +1}."""
    ys = np.linspace(0.0, 1.0, side)
    xs = np.arange(side, dtype=np.float64)
    delta = math.copysign(_wall_offset(t), t - WALL_CENTER_LATENT)
    center = (0.5 + delta) * (side - 1)
    bow = _wall_curvature(t) * (side - 1)
    wall_x = center + bow * np.sin(np.pi * ys)
    img = np.where(xs[None, :] > wall_x[:, None], 1.0, -1.0)
    if _extra_wall_count(t):
        img[:, xs < SECOND_WALL_POS * (side - 1)] = 1.0
    return img


def generate_domain_wall_grid(
    height: int,
    width: int,
    image_side: int,
    noise_sigma: float,
    seed: int,
) -> ObservationGrid:
    """Synthetic image grid with an exact per-location quality score."""
    if height < 2 or width < 2:
        raise ArgumentError("height and width must be >= 2")
    if image_side < 8:
        raise ArgumentError("image_side must be >= 8")
    if noise_sigma < 0:
        raise ArgumentError("noise_sigma must be >= 0")

    n = height * width
    rng = np.random.default_rng(seed)
    payloads = np.empty((n, image_side, image_side), dtype=np.float32)
    scores = np.empty(n, dtype=np.float64)
    for i in range(n):
        t = i / (n - 1)
        img = domain_wall_image(t, image_side)
        if noise_sigma > 0:
            img = img + rng.normal(0.0, noise_sigma, img.shape)
        payloads[i] = img.astype(np.float32)
        scores[i] = domain_wall_score(t)

    return ObservationGrid(
        height=height,
        width=width,
        kind=PayloadKind.IMAGE_PATCH,
        payloads=payloads,
        data_range=_compute_data_range(payloads),
        oracle_score=scores,
        name=f"domain-wall-{height}x{width}",
    )


def loop_area(spectrum: np.ndarray) -> float:
    """Absolute shoelace area of the closed (voltage, response) traversal.

    The loop is taken in raw point order (hysteresis loops are ordered
    traversals) and closed from the last point back to the first.
    """
    arr = np.asarray(spectrum, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != 2:
        raise ArgumentError(
            f"loop_area expects a 2-channel spectrum payload, got shape {arr.shape}"
        )
    if arr.shape[1] < 3:
        raise ArgumentError("loop_area needs at least 3 points")
    if not np.all(np.isfinite(arr)):
        raise DataError("loop_area input contains non-finite values")
    v, r = arr[0], arr[1]
    cross = v * np.roll(r, -1) - np.roll(v, -1) * r
    return abs(float(cross.sum())) / 2.0
