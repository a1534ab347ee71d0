import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pxbo.dataset import generate_domain_wall_grid
from pxbo.errors import ArgumentError
from pxbo.similarity import find_proxy, payload_similarity, ssim

FIXTURES = json.loads(
    (Path(__file__).parent / "fixtures" / "ssim_cases.json").read_text()
)


def fixture_pair(case):
    rng = np.random.default_rng(case["seed"])
    a = rng.random(tuple(case["shape"]))
    b = rng.random(tuple(case["shape"]))
    return a, b


class TestSsim:
    def test_identity_is_exactly_one(self):
        rng = np.random.default_rng(0)
        a = rng.random((16, 16))
        assert ssim(a, a, 1.0) == 1.0
        assert ssim(a, a, 123.4) == 1.0

    def test_mean_shift_penalized(self):
        rng = np.random.default_rng(1)
        a = rng.random((16, 16))
        assert ssim(a, a + 0.25, 1.0) < 1.0

    @pytest.mark.parametrize("case", FIXTURES, ids=lambda c: f"seed{c['seed']}")
    def test_matches_reference_fixtures(self, case):
        a, b = fixture_pair(case)
        axis = 0 if case["shape"] == [2, 64] else None
        got = ssim(a, b, case["data_range"], channel_axis=axis)
        assert got == pytest.approx(case["expected"], abs=1e-7)

    def test_shape_mismatch(self):
        with pytest.raises(ArgumentError):
            ssim(np.zeros((16, 16)), np.zeros((16, 15)), 1.0)

    def test_smaller_than_window(self):
        with pytest.raises(ArgumentError):
            ssim(np.zeros((5, 16)), np.zeros((5, 16)), 1.0)
        with pytest.raises(ArgumentError):
            ssim(np.zeros(6), np.zeros(6), 1.0)

    def test_bad_data_range(self):
        with pytest.raises(ArgumentError):
            ssim(np.zeros((16, 16)), np.zeros((16, 16)), 0.0)

    def test_one_dimensional_window(self):
        rng = np.random.default_rng(5)
        a, b = rng.random(32), rng.random(32)
        value = ssim(a, b, 1.0)
        assert -1.0 <= value <= 1.0

    @given(st.integers(0, 2**31 - 1))
    @settings(max_examples=30, deadline=None)
    def test_symmetric(self, seed):
        rng = np.random.default_rng(seed)
        a = rng.random((12, 12))
        b = rng.random((12, 12))
        assert ssim(a, b, 1.0) == pytest.approx(ssim(b, a, 1.0), abs=1e-12)

    @given(st.integers(0, 2**31 - 1), st.floats(0.1, 10.0))
    @settings(max_examples=30, deadline=None)
    def test_bounded(self, seed, scale):
        rng = np.random.default_rng(seed)
        a = rng.normal(0, scale, (12, 12))
        b = rng.normal(0, scale, (12, 12))
        value = ssim(a, b, 2.0 * scale)
        assert -1.0 - 1e-12 <= value <= 1.0 + 1e-12


@pytest.fixture(scope="module")
def grid():
    return generate_domain_wall_grid(10, 10, 16, 0.1, seed=21)


class TestFindProxy:
    def test_identical_payload_wins(self, grid):
        explored = [3, 7, 50, 80]
        assert find_proxy(grid.payloads[7], explored, grid) == 7

    def test_singleton(self, grid):
        assert find_proxy(grid.payloads[0], [42], grid) == 42

    def test_matches_exhaustive_scan(self, grid):
        rng = np.random.default_rng(9)
        explored = sorted(rng.choice(100, size=10, replace=False).tolist())
        new = grid.payloads[13] + rng.normal(0, 0.02, grid.payload_shape).astype(
            np.float32
        )
        scores = {
            loc: payload_similarity(new, grid.payloads[loc], grid) for loc in explored
        }
        brute = max(sorted(scores), key=lambda loc: scores[loc])
        assert find_proxy(new, explored, grid) == brute

    def test_iteration_order_irrelevant(self, grid):
        explored = [5, 17, 33, 71, 90]
        new = grid.payloads[34]
        a = find_proxy(new, explored, grid)
        b = find_proxy(new, list(reversed(explored)), grid)
        assert a == b

    def test_empty_explored(self, grid):
        with pytest.raises(ArgumentError):
            find_proxy(grid.payloads[0], [], grid)

    def test_shape_mismatch(self, grid):
        with pytest.raises(ArgumentError):
            find_proxy(np.zeros((4, 4)), [1, 2], grid)
