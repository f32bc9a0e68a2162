import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dploc.bounds import (
    RegularityProfile,
    empirical_median_bound,
    mom_bound,
    ptr_median_bound,
    smooth_median_bound,
    subgaussian_mean_bound,
)
from dploc.core_numeric import InvalidParameterError
from dploc.median_dp import PrivacyBudget

B = PrivacyBudget(1.0, 1e-6)
UNIFORM = RegularityProfile(m=0.5, L=1.0, r=0.4, R=1.0)


class TestProfile:
    def test_valid(self):
        assert RegularityProfile(0.0, 1 / (2 * math.pi), 1.0, 0.0).R == 0.0

    @pytest.mark.parametrize("args", [(0, 0, 1, 1), (0, 1, 0, 1), (2, 1, 0.1, 1), (0, 2, 0.5, 1)])
    def test_invalid(self, args):
        with pytest.raises(InvalidParameterError):
            RegularityProfile(*args)


class TestSubgaussianMean:
    def test_examples(self):
        assert subgaussian_mean_bound(1, 100, 0.05) == pytest.approx(0.2716, abs=5e-5)
        assert subgaussian_mean_bound(1, 50, 2 / math.e) == pytest.approx(math.sqrt(2 / 50))
        assert subgaussian_mean_bound(1, 400, 0.1) == pytest.approx(subgaussian_mean_bound(1, 100, 0.1) / 2)

    @pytest.mark.parametrize("args", [(0, 10, 0.1), (1, 0, 0.1), (1, 10, 0), (1, 10, 1)])
    def test_invalid(self, args):
        with pytest.raises(InvalidParameterError):
            subgaussian_mean_bound(*args)


class TestEmpiricalMedian:
    def test_examples(self):
        assert empirical_median_bound(1000, 1.0, 0.05) == pytest.approx(0.08589, rel=1e-4)
        assert empirical_median_bound(200, 1.0, 2 / math.e) == pytest.approx(math.sqrt(2 / 200))
        assert empirical_median_bound(200, 2.0, 0.1) == pytest.approx(empirical_median_bound(200, 1.0, 0.1) / 2)

    def test_alpha_below_neighbourhood_range(self):
        with pytest.raises(InvalidParameterError, match="neighborhood"):
            empirical_median_bound(100, 1.0, 0.5, r=0.05)


class TestSmoothMedian:
    def test_reference_values(self):
        bv = smooth_median_bound(10_000, UNIFORM, 2.0, B, 0.05)
        t = bv.terms
        assert t["subgaussian"] == pytest.approx(0.03186, rel=1e-3)
        assert t["privacy"] == pytest.approx(0.12984, rel=1e-3)
        assert 1e-29 < t["truncation"] < 1e-27
        assert bv.total == pytest.approx(0.1617, rel=1e-3)
        assert "2000" in bv.notes["log_floor_term"]

    def test_first_term_is_empirical_median_bound_at_quarter_alpha(self):
        bv = smooth_median_bound(5000, UNIFORM, 2.0, B, 0.1)
        assert bv.terms["subgaussian"] == pytest.approx(empirical_median_bound(5000, 1.0, 0.025), rel=1e-15)

    def test_truncation_term_decreases_in_n(self):
        vals = [smooth_median_bound(n, UNIFORM, 2.0, B, 0.05).terms["truncation"] for n in (2000, 4000, 8000)]
        assert vals[0] > vals[1] > vals[2]

    def test_preconditions(self):
        with pytest.raises(InvalidParameterError, match="R \\+ r"):
            smooth_median_bound(10_000, UNIFORM, 1.4, B, 0.05)
        with pytest.raises(InvalidParameterError, match="alpha"):
            smooth_median_bound(100, UNIFORM, 2.0, B, 0.05)


class TestPtrMedian:
    def test_reference_values(self):
        bv = ptr_median_bound(10_000, UNIFORM, B, 0.05)
        assert float(bv.notes["C"]) == pytest.approx(1.5765, rel=1e-4)
        assert bv.terms["subgaussian"] == pytest.approx(0.03186, rel=1e-3)
        assert bv.terms["privacy"] == pytest.approx(0.15168, rel=1e-3)
        assert bv.total == pytest.approx(0.1835, rel=1e-3)

    def test_privacy_term_log_n_over_n(self):
        # C depends on n through log(Lrn/2); strip it off before comparing
        a = ptr_median_bound(10_000, UNIFORM, B, 0.05)
        b = ptr_median_bound(40_000, UNIFORM, B, 0.05)
        ratio = (b.terms["privacy"] / float(b.notes["C"])) / (a.terms["privacy"] / float(a.notes["C"]))
        assert ratio == pytest.approx(math.log(40_000) / 40_000 / (math.log(10_000) / 10_000), rel=1e-12)

    def test_privacy_term_linear_in_log_alpha(self):
        # with C held fixed the alpha dependence is (a + log(8/alpha)) log(8/alpha): quadratic, no square root
        bv = ptr_median_bound(10_000, UNIFORM, B, 0.05)
        C = float(bv.notes["C"])
        l8 = math.log(160)
        expected = C * math.log(10_000) * (math.log(2e6) + l8 + 1) * l8 / 10_000
        assert bv.terms["privacy"] == pytest.approx(expected, rel=1e-14)

    def test_shares_first_term_with_smooth(self):
        for alpha in (0.01, 0.05, 0.2):
            assert (ptr_median_bound(10_000, UNIFORM, B, alpha).terms["subgaussian"]
                    == smooth_median_bound(10_000, UNIFORM, 2.0, B, alpha).terms["subgaussian"])

    def test_alpha_range(self):
        with pytest.raises(InvalidParameterError):
            ptr_median_bound(50, UNIFORM, B, 0.05)


class TestMoM:
    def test_examples(self):
        assert mom_bound(1, 1024, 0.05) == pytest.approx(0.1200, rel=1e-3)
        assert mom_bound(3, 100, 2 / math.e) == pytest.approx(6 / 10)
        assert mom_bound(1, 500, 0.1) == pytest.approx(math.sqrt(2) * subgaussian_mean_bound(1, 500, 0.1))

    def test_too_few_points(self):
        with pytest.raises(InvalidParameterError):
            mom_bound(1, 20, 0.05)


class TestShape:
    ALPHAS = [0.3, 0.1, 0.05, 0.01]
    NS = [5000, 10_000, 20_000, 40_000]

    def _all(self, n, alpha):
        return [
            subgaussian_mean_bound(1, n, alpha),
            empirical_median_bound(n, 1.0, alpha),
            smooth_median_bound(n, UNIFORM, 2.0, B, alpha).total,
            ptr_median_bound(n, UNIFORM, B, alpha).total,
            mom_bound(1, n, alpha),
        ]

    def test_strictly_decreasing_in_n(self):
        for alpha in self.ALPHAS:
            rows = [self._all(n, alpha) for n in self.NS]
            for a, b in zip(rows, rows[1:]):
                assert all(x > y for x, y in zip(a, b))

    def test_strictly_increasing_as_alpha_shrinks(self):
        for n in self.NS:
            rows = [self._all(n, a) for a in self.ALPHAS]
            for a, b in zip(rows, rows[1:]):
                assert all(x < y for x, y in zip(a, b))

    @given(st.integers(3000, 10**6), st.floats(0.01, 0.9))
    def test_terms_sum_to_total(self, n, alpha):
        for bv in (smooth_median_bound(n, UNIFORM, 2.0, B, alpha), ptr_median_bound(n, UNIFORM, B, alpha)):
            assert abs(sum(bv.terms.values()) - bv.total) <= 1e-15 * bv.total
            assert all(v >= 0 for v in bv.terms.values())
