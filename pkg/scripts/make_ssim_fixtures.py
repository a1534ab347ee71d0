#!/usr/bin/env python3
"""Regenerate tests/fixtures/ssim_cases.json from scikit-image.

The fixture file freezes reference structural-similarity values for seeded
random payload pairs; the in-package implementation is tested against it.
Run from the repository root.  Requires scikit-image (not a package
dependency).
"""

import json
from pathlib import Path

import numpy as np
from skimage.metrics import structural_similarity

OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "ssim_cases.json"


def main() -> None:
    cases = []
    for seed in range(20):
        rng = np.random.default_rng(seed)
        a = rng.random((16, 16))
        b = rng.random((16, 16))
        expected = float(structural_similarity(a, b, data_range=1.0))
        cases.append(
            {"seed": seed, "shape": [16, 16], "data_range": 1.0, "expected": expected}
        )
    # multichannel spectra: (channels, length), channel axis 0
    for seed in range(100, 105):
        rng = np.random.default_rng(seed)
        a = rng.random((2, 64))
        b = rng.random((2, 64))
        expected = float(
            structural_similarity(a, b, data_range=1.0, channel_axis=0)
        )
        cases.append(
            {"seed": seed, "shape": [2, 64], "data_range": 1.0, "expected": expected}
        )
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(cases, indent=2))
    print(f"wrote {len(cases)} cases to {OUT}")


if __name__ == "__main__":
    main()
