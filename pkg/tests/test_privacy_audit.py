import numpy as np
import pytest

from dploc.core_numeric import InvalidParameterError, NoiseSource, hamming_distance
from dploc.median_dp import PrivacyBudget, a_hat, a_hat_window
from dploc.privacy_audit import (
    STRATEGIES,
    NeighborPair,
    audit_mechanism,
    check_a_hat_sensitivity,
    make_neighbor_pairs,
    ptr_mechanism,
    pure_noise_mechanism,
    release_minimum_mechanism,
    smooth_median_mechanism,
)

BUDGET = PrivacyBudget(1.0, 0.01)


class TestNeighborPairs:
    def test_random_replace(self):
        (pair,) = make_neighbor_pairs([1, 2, 3], ["random-replace"], 1, NoiseSource(0))
        assert hamming_distance(pair.x, pair.x_prime) == 1
        assert pair.strategy == "random-replace"

    def test_outlier_swap_on_small_sample(self):
        pairs = make_neighbor_pairs([1, 2, 3], ["outlier-swap"], 20, NoiseSource(1))
        seen = {tuple(p.x_prime) for p in pairs}
        assert seen == {(1.0, 2.0, 1e6), (-1e6, 2.0, 3.0)}

    def test_median_straddle_stays_near_median(self):
        base = np.arange(1.0, 21.0)
        for p in make_neighbor_pairs(base, ["median-straddle"], 50, NoiseSource(2)):
            (j,) = np.flatnonzero(p.x != p.x_prime)
            # moves one of x_(9..11) to somewhere in [x_(8), x_(12)]
            assert 9 <= p.x[j] <= 11
            assert 8 <= p.x_prime[j] <= 12

    def test_all_strategies_distance_one(self):
        base = np.random.default_rng(0).standard_normal(31)
        pairs = make_neighbor_pairs(base, STRATEGIES, 300, NoiseSource(3))
        assert all(hamming_distance(p.x, p.x_prime) == 1 for p in pairs)
        assert {p.strategy for p in pairs} == set(STRATEGIES)

    def test_count_zero(self):
        with pytest.raises(InvalidParameterError):
            make_neighbor_pairs([1, 2, 3], STRATEGIES, 0, NoiseSource(0))

    def test_empty_base(self):
        with pytest.raises(InvalidParameterError):
            make_neighbor_pairs([], STRATEGIES, 1, NoiseSource(0))

    def test_unknown_strategy(self):
        with pytest.raises(InvalidParameterError):
            make_neighbor_pairs([1, 2, 3], ["swap-all"], 1, NoiseSource(0))


class TestAudit:
    def test_data_independent_mechanism_passes(self):
        pair = make_neighbor_pairs([1, 2, 3], ["outlier-swap"], 1, NoiseSource(4))[0]
        rep = audit_mechanism(pure_noise_mechanism(), pair, BUDGET, 20, 20_000, NoiseSource(5))
        assert rep.passed
        assert rep.verdict == "no violation detected at stated power"

    def test_identical_pair_passes(self):
        x = np.array([0.1, 0.5, 0.7, 2.0])
        rep = audit_mechanism(smooth_median_mechanism(1.0, BUDGET), NeighborPair(x, x.copy(), "identity"),
                              BUDGET, 20, 10_000, NoiseSource(6))
        assert rep.passed

    def test_release_minimum_fails(self):
        x = np.array([0.0, 1.0, 2.0, 3.0])
        xp = x.copy()
        xp[0] = -1e6
        rep = audit_mechanism(release_minimum_mechanism(), NeighborPair(x, xp, "outlier-swap"),
                              BUDGET, 20, 10_000, NoiseSource(7))
        assert not rep.passed
        assert rep.verdict == "violation detected"
        assert rep.violation_forward == 1.0 or rep.violation_backward == 1.0

    def test_probabilities_sum_to_one(self):
        base = np.random.default_rng(1).standard_normal(50)
        pair = make_neighbor_pairs(base, ["median-straddle"], 1, NoiseSource(8))[0]
        eta = 0.05
        rep = audit_mechanism(ptr_mechanism(eta, BUDGET), pair, BUDGET, 10, 10_000, NoiseSource(9))
        assert rep.p_x.sum() == pytest.approx(1.0)
        assert rep.p_x_prime.sum() == pytest.approx(1.0)
        assert len(rep.cell_labels) == 10 + 3
        assert rep.cell_labels[-1] == "NOREPLY"

    def test_report_dict(self):
        pair = make_neighbor_pairs([1, 2, 3, 4], ["random-replace"], 1, NoiseSource(4))[0]
        d = audit_mechanism(pure_noise_mechanism(), pair, BUDGET, 5, 10_000, NoiseSource(1)).as_dict()
        assert {"p_x", "p_x_prime", "passed", "verdict", "worst_excess_over_delta_plus_slack"} <= set(d)

    @pytest.mark.parametrize("bins,trials", [(1, 10_000), (20, 9_999)])
    def test_invalid(self, bins, trials):
        pair = NeighborPair(np.array([1.0, 2.0]), np.array([1.0, 3.0]), "random-replace")
        with pytest.raises(InvalidParameterError):
            audit_mechanism(pure_noise_mechanism(), pair, BUDGET, bins, trials, NoiseSource(0))


class TestAHatSensitivity:
    def test_window_form_has_no_violations(self):
        assert check_a_hat_sensitivity(10_000, NoiseSource(10)) == 0

    def test_reach_form_is_caught(self):
        assert check_a_hat_sensitivity(10_000, NoiseSource(10), a_hat_rule="reach") > 0

    def test_single_pair(self):
        x, xp = [1, 2, 3, 10], [1, 2, 3, 0.5]
        for f in (a_hat, a_hat_window):
            assert abs(f(x, 0.5) - f(xp, 0.5)) <= 1
            assert f(x, 0.5) - f(list(x), 0.5) == 0

    def test_invalid(self):
        with pytest.raises(InvalidParameterError):
            check_a_hat_sensitivity(0, NoiseSource(0))

    def test_cell_labels_are_plain_numbers(self):
        pair = make_neighbor_pairs([1, 2, 3, 4], ["random-replace"], 1, NoiseSource(4))[0]
        rep = audit_mechanism(pure_noise_mechanism(), pair, BUDGET, 5, 10_000, NoiseSource(1))
        assert not any("np." in c for c in rep.cell_labels)
