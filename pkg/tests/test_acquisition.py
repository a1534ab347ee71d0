import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pxbo.acquisition import (
    acquisition_field,
    expected_improvement,
    select_next,
)
from pxbo.errors import ArgumentError
from pxbo.surrogate import Posterior

from oracles import ei_mp

finite = st.floats(-20, 20, allow_nan=False)


class TestExpectedImprovement:
    def test_zero_variance_branch(self):
        assert expected_improvement(5.0, 0.0, -3.0, 0.01) == 0.0
        assert expected_improvement(-5.0, 0.0, 100.0, 0.01) == 0.0

    def test_at_the_margin_equals_standard_normal_density(self):
        # mean == incumbent + xi, sigma = 1: EI = pdf(0) = 1/sqrt(2*pi)
        value = expected_improvement(1.01, 1.0, 1.0, 0.01)
        assert value == pytest.approx(0.39894228040143267, abs=1e-12)

    def test_deep_tail_vanishes_without_going_negative(self):
        value = expected_improvement(-10.0, 1.0, 0.0, 0.0)
        expected = float(ei_mp(-10.0, 1.0, 0.0, 0.0))
        assert 0.0 <= value < 1e-20
        assert value == pytest.approx(expected, abs=1e-24)

    def test_matches_high_precision_oracle(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            mean = float(rng.normal(0, 3))
            sigma = float(rng.uniform(0.01, 4))
            incumbent = float(rng.normal(0, 3))
            value = expected_improvement(mean, sigma**2, incumbent, 0.01)
            expected = float(ei_mp(mean, sigma, incumbent, 0.01))
            assert value == pytest.approx(expected, abs=1e-10)

    def test_small_sigma_limit(self):
        # EI -> max(mean - incumbent - xi, 0) as sigma -> 0+
        gap = 0.7
        value = expected_improvement(gap + 0.01, 1e-16, 0.0, 0.01)
        assert value == pytest.approx(gap, abs=1e-9)
        below = expected_improvement(-0.5, 1e-16, 0.0, 0.01)
        assert below == pytest.approx(0.0, abs=1e-12)

    def test_non_finite_rejected(self):
        with pytest.raises(ArgumentError):
            expected_improvement(math.nan, 1.0, 0.0, 0.01)
        with pytest.raises(ArgumentError):
            expected_improvement(0.0, math.inf, 0.0, 0.01)

    def test_negative_variance_or_xi_rejected(self):
        with pytest.raises(ArgumentError):
            expected_improvement(0.0, -1.0, 0.0, 0.01)
        with pytest.raises(ArgumentError):
            expected_improvement(0.0, 1.0, 0.0, -0.01)

    @given(finite, st.floats(1e-6, 10), finite)
    @settings(max_examples=200, deadline=None)
    def test_nonnegative(self, mean, sigma, incumbent):
        assert expected_improvement(mean, sigma**2, incumbent, 0.01) >= 0.0

    @given(finite, st.floats(1e-3, 5), finite, st.floats(-5, 5))
    @settings(max_examples=200, deadline=None)
    def test_monotone_in_mean(self, mean, sigma, incumbent, bump):
        lo = expected_improvement(mean, sigma**2, incumbent, 0.01)
        hi = expected_improvement(mean + abs(bump), sigma**2, incumbent, 0.01)
        assert hi >= lo - 1e-12

    @given(finite, st.floats(1e-3, 3), st.floats(1e-3, 3))
    @settings(max_examples=200, deadline=None)
    def test_monotone_in_sigma_below_margin(self, incumbent, s1, s2):
        mean = incumbent  # below incumbent + xi
        lo_s, hi_s = sorted([s1, s2])
        lo = expected_improvement(mean, lo_s**2, incumbent, 0.01)
        hi = expected_improvement(mean, hi_s**2, incumbent, 0.01)
        assert hi >= lo - 1e-12


class TestSelectNext:
    def test_singleton(self):
        post = Posterior(mean={4: 0.0}, variance={4: 1.0})
        assert select_next(post, 0.0) == 4

    def test_prefers_higher_variance_at_equal_mean(self):
        post = Posterior(mean={0: 0.0, 1: 0.0}, variance={0: 1.0, 1: 0.25})
        assert select_next(post, 0.5) == 0
        ei0 = float(ei_mp(0.0, 1.0, 0.5, 0.01))
        ei1 = float(ei_mp(0.0, 0.5, 0.5, 0.01))
        assert ei0 > ei1

    def test_all_zero_variance_tie_breaks_to_lowest_index(self):
        post = Posterior(
            mean={3: 1.0, 1: 2.0, 2: 3.0}, variance={3: 0.0, 1: 0.0, 2: 0.0}
        )
        assert select_next(post, 0.0) == 1

    def test_exact_tie_prefers_higher_variance_then_lower_index(self):
        post = Posterior(
            mean={5: 0.0, 2: 0.0, 9: 0.0}, variance={5: 2.0, 2: 2.0, 9: 1.0}
        )
        assert select_next(post, 10.0) != 9
        assert select_next(post, 10.0) == 2

    def test_empty_posterior(self):
        with pytest.raises(ArgumentError):
            select_next(Posterior(mean={}, variance={}), 0.0)

    def test_map_iteration_order_irrelevant(self):
        rng = np.random.default_rng(0)
        ids = list(range(30))
        means = {i: float(rng.normal()) for i in ids}
        variances = {i: float(rng.uniform(0.1, 2)) for i in ids}
        fwd = select_next(Posterior(means, variances), 0.3)
        rev = select_next(
            Posterior(
                {i: means[i] for i in reversed(ids)},
                {i: variances[i] for i in reversed(ids)},
            ),
            0.3,
        )
        assert fwd == rev

    def test_field_values_nonnegative_and_finite(self):
        rng = np.random.default_rng(1)
        post = Posterior(
            mean={i: float(rng.normal()) for i in range(10)},
            variance={i: float(rng.uniform(0, 2)) for i in range(10)},
        )
        f = acquisition_field(post, 0.0, 0.01)
        assert f.xi == 0.01
        assert all(v >= 0 and math.isfinite(v) for v in f.values.values())
