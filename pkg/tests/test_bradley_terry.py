import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pxbo.bradley_terry import (
    BtModel,
    ComparisonLog,
    ComparisonRecord,
    VoteSource,
    current_best,
    fit,
    preference_probability,
)
from pxbo.errors import ArgumentError, ConsistencyError

from oracles import bt_lattice_argmax


def rec(winner, loser, source=VoteSource.ORACLE, validated=True, it=0):
    return ComparisonRecord(
        winner=winner, loser=loser, source=source, validated=validated,
        created_at_iteration=it,
    )


def sample_log(strengths, per_pair, seed, ids=None):
    """Round-robin comparisons drawn from the Bradley-Terry law."""
    rng = np.random.default_rng(seed)
    ids = ids if ids is not None else list(range(len(strengths)))
    log = ComparisonLog()
    for i in range(len(ids)):
        for j in range(i + 1, len(ids)):
            p_i = 1.0 / (1.0 + np.exp(-(strengths[i] - strengths[j])))
            for _ in range(per_pair):
                if rng.random() < p_i:
                    log.append(rec(ids[i], ids[j]))
                else:
                    log.append(rec(ids[j], ids[i]))
    return log


class TestFit:
    def test_empty_log_symmetric(self):
        model = fit(ComparisonLog(), {0, 1})
        assert model.utilities[0] == pytest.approx(0.0, abs=1e-9)
        assert model.utilities[1] == pytest.approx(0.0, abs=1e-9)
        assert model.converged

    def test_balanced_record_symmetric(self):
        log = ComparisonLog()
        for _ in range(3):
            log.append(rec(0, 1))
            log.append(rec(1, 0))
        model = fit(log, {0, 1})
        assert model.utilities[0] == pytest.approx(0.0, abs=1e-9)
        assert model.utilities[1] == pytest.approx(0.0, abs=1e-9)

    def test_zero_mean_gauge(self):
        log = sample_log([0, 1, 2], 20, seed=4)
        model = fit(log, {0, 1, 2})
        assert sum(model.utilities.values()) == pytest.approx(0.0, abs=1e-9)
        assert all(np.isfinite(v) for v in model.utilities.values())

    def test_recovers_ordering_vs_lattice_oracle(self):
        strengths = [0.0, 1.0, 2.0, 3.0, 4.0]
        log = sample_log(strengths, 50, seed=123)
        model = fit(log, set(range(5)))
        fitted_order = sorted(range(5), key=lambda i: model.utilities[i])

        records = [(r.winner, r.loser) for r in log.records]
        lattice_u = bt_lattice_argmax(records, 5)
        oracle_order = sorted(range(5), key=lambda i: lattice_u[i])

        assert fitted_order == oracle_order == [0, 1, 2, 3, 4]

    def test_empty_locations_rejected(self):
        with pytest.raises(ArgumentError):
            fit(ComparisonLog(), set())

    def test_unknown_location_rejected(self):
        log = ComparisonLog([rec(0, 7)])
        with pytest.raises(ConsistencyError, match="7"):
            fit(log, {0, 1})

    def test_refit_is_bit_deterministic(self):
        log = sample_log([0, 0.5, 1.5], 30, seed=8)
        a = fit(log, {0, 1, 2})
        b = fit(log, {0, 1, 2})
        assert a.utilities == b.utilities
        assert a.iterations_used == b.iterations_used

    def test_translation_invariance_of_generating_strengths(self):
        base = [0.0, 0.7, 1.9, 2.4]
        shifted = [s + 11.0 for s in base]
        log_a = sample_log(base, 25, seed=5)
        log_b = sample_log(shifted, 25, seed=5)
        ua = fit(log_a, set(range(4))).utilities
        ub = fit(log_b, set(range(4))).utilities
        assert ua == ub

    def test_never_compared_location_stays_near_zero_mean(self):
        log = sample_log([0.0, 2.0], 40, seed=2)
        model = fit(log, {0, 1, 2})
        # location 2 only has anchor pseudo-games
        assert abs(model.utilities[2]) < abs(model.utilities[1])

    def test_monotone_in_added_record(self):
        # appending one more "A beats B" never decreases u_A - u_B
        rng = np.random.default_rng(77)
        for trial in range(100):
            n = int(rng.integers(2, 6))
            n_rec = int(rng.integers(0, 30))
            log = ComparisonLog()
            for _ in range(n_rec):
                i, j = rng.choice(n, size=2, replace=False)
                log.append(rec(int(i), int(j)))
            a, b = rng.choice(n, size=2, replace=False)
            before = fit(log, set(range(n))).utilities
            log.append(rec(int(a), int(b)))
            after = fit(log, set(range(n))).utilities
            gap_before = before[a] - before[b]
            gap_after = after[a] - after[b]
            assert gap_after >= gap_before - 5e-8

    def test_converges_within_budget(self):
        log = sample_log(np.arange(10) * 0.5, 45, seed=3)
        model = fit(log, set(range(10)))
        assert model.converged
        assert model.iterations_used <= 1000
        assert model.fitted_on == len(log.records)


class TestPreferenceProbability:
    def test_equal_utilities(self):
        model = BtModel({0: 0.3, 1: 0.3}, 0, True, 1)
        assert preference_probability(model, 0, 1) == pytest.approx(0.5, abs=1e-15)

    def test_log3_gap(self):
        model = BtModel({0: np.log(3.0), 1: 0.0}, 0, True, 1)
        assert preference_probability(model, 0, 1) == pytest.approx(0.75, abs=1e-12)

    def test_huge_gap_is_stable(self):
        # the winning side rounds to 1.0 at float64 for a 100-unit gap; the
        # stability contract is: no overflow/NaN and the losing side stays > 0
        model = BtModel({0: 100.0, 1: 0.0}, 0, True, 1)
        p = preference_probability(model, 0, 1)
        q = preference_probability(model, 1, 0)
        assert np.isfinite(p) and np.isfinite(q)
        assert 0.0 < q < 1e-40
        assert 0.999 < p <= 1.0
        assert p + q == pytest.approx(1.0, abs=1e-12)

    def test_unknown_id(self):
        model = BtModel({0: 0.0}, 0, True, 1)
        with pytest.raises(ConsistencyError):
            preference_probability(model, 0, 5)

    @given(
        st.floats(-50, 50), st.floats(-50, 50)
    )
    @settings(max_examples=200, deadline=None)
    def test_complement_sums_to_one(self, ua, ub):
        model = BtModel({0: ua, 1: ub}, 0, True, 1)
        total = preference_probability(model, 0, 1) + preference_probability(model, 1, 0)
        assert total == pytest.approx(1.0, abs=1e-12)


class TestCurrentBest:
    def test_argmax(self):
        assert current_best(BtModel({0: 0.4, 1: -0.4}, 0, True, 1)) == 0

    def test_tie_breaks_to_lowest_index(self):
        assert current_best(BtModel({0: 0.0, 1: 0.0}, 0, True, 1)) == 0
        assert current_best(BtModel({5: 1.0, 2: 1.0}, 0, True, 1)) == 2

    def test_matches_lattice_oracle_top(self):
        strengths = [0.0, 1.0, 2.0, 3.0, 4.0]
        log = sample_log(strengths, 50, seed=123)
        model = fit(log, set(range(5)))
        assert current_best(model) == 4

    def test_empty_model(self):
        with pytest.raises(ArgumentError):
            current_best(BtModel({}, 0, True, 0))


class TestRecordsAndLog:
    def test_self_comparison_rejected(self):
        with pytest.raises(ArgumentError):
            rec(3, 3)

    def test_human_votes_must_be_validated(self):
        with pytest.raises(ArgumentError):
            ComparisonRecord(0, 1, VoteSource.HUMAN, False, 0)

    def test_jsonl_roundtrip(self):
        log = ComparisonLog(
            [
                rec(0, 1),
                rec(2, 0, source=VoteSource.PROXY, validated=False, it=3),
                rec(1, 2, source=VoteSource.HUMAN, it=1),
            ]
        )
        restored = ComparisonLog.from_jsonl(log.to_jsonl())
        assert [r.to_json() for r in restored.records] == [
            r.to_json() for r in log.records
        ]

    def test_unvalidated_proxy_indices(self):
        log = ComparisonLog(
            [rec(0, 1), rec(2, 0, source=VoteSource.PROXY, validated=False)]
        )
        assert log.unvalidated_proxy_indices() == [1]
