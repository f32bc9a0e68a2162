import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dploc.core_numeric import (
    ConstantNoise,
    InvalidParameterError,
    NoiseSource,
    SortedSample,
    TooFewPointsError,
    as_sample,
    derive_seed,
    empirical_median,
    hamming_distance,
    left_median_index,
    order_stat,
    padded_order_stats,
    sample_standard_laplace,
    sort_sample,
    truncate,
)

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False)
positive = st.floats(min_value=1e-3, max_value=1e3)


class TestTruncate:
    def test_examples(self):
        assert truncate(3, 2) == 2
        assert truncate(-5, 2) == -2
        assert truncate(1.5, 2) == 1.5

    def test_array(self):
        np.testing.assert_array_equal(truncate(np.array([-5.0, 0.3, 9.0]), 1.0), [-1.0, 0.3, 1.0])

    @pytest.mark.parametrize("T", [0.0, -1.0, float("nan")])
    def test_rejects_nonpositive_level(self, T):
        with pytest.raises(InvalidParameterError):
            truncate(1.0, T)

    @given(finite, positive)
    def test_idempotent(self, u, T):
        assert truncate(truncate(u, T), T) == truncate(u, T)

    @given(finite, finite, positive)
    def test_monotone(self, u, v, T):
        lo, hi = min(u, v), max(u, v)
        assert truncate(lo, T) <= truncate(hi, T)
        assert -T <= truncate(u, T) <= T


class TestSortSample:
    def test_examples(self):
        assert sort_sample([3, 1, 2]).ordered.tolist() == [1, 2, 3]
        assert sort_sample([7, 7]).ordered.tolist() == [7, 7]

    def test_too_few(self):
        with pytest.raises(TooFewPointsError):
            sort_sample([1])

    @pytest.mark.parametrize("bad", [[1.0, float("nan")], [1.0, float("inf")], [[1.0, 2.0]]])
    def test_rejects_malformed(self, bad):
        with pytest.raises(InvalidParameterError):
            sort_sample(bad)

    @given(st.lists(finite, min_size=2, max_size=50))
    def test_sorted_permutation(self, xs):
        s = sort_sample(xs)
        assert np.all(np.diff(s.ordered) >= 0)
        assert sorted(xs) == s.ordered.tolist()

    def test_result_is_read_only(self):
        s = sort_sample([2.0, 1.0])
        with pytest.raises(ValueError):
            s.ordered[0] = 5.0


class TestOrderStat:
    def test_examples(self):
        s = sort_sample([1, 2, 3])
        assert order_stat(s, 2) == 2
        assert order_stat(s, 0, pad=5) == -5
        assert order_stat(s, 9) == math.inf
        assert order_stat(s, -3) == -math.inf

    def test_one_indexed_getitem(self):
        s = sort_sample([30, 10, 20])
        assert (s[1], s[2], s[3]) == (10, 20, 30)

    def test_padded_matches_scalar(self):
        s = sort_sample([4.0, -1.0, 2.5, 0.0])
        for pad in (math.inf, 3.0):
            vec = padded_order_stats(s, -3, 8, pad=pad)
            assert vec.tolist() == [order_stat(s, k, pad) for k in range(-3, 9)]

    @given(st.lists(finite, min_size=2, max_size=30), st.sampled_from([math.inf, 1e7]))
    def test_nondecreasing_in_k(self, xs, pad):
        s = sort_sample(xs)
        vals = [order_stat(s, k, pad) for k in range(-3, len(xs) + 4)]
        assert all(a <= b for a, b in zip(vals, vals[1:]))

    def test_extended_real_subtraction(self):
        s = sort_sample([0.0, 1.0])
        assert order_stat(s, 5) - order_stat(s, -5) == math.inf


class TestHamming:
    def test_examples(self):
        assert hamming_distance([1, 2, 3], [1, 2, 3]) == 0
        assert hamming_distance([1, 2, 3], [1, 9, 3]) == 1
        assert hamming_distance([1, 2], [2, 1]) == 2

    def test_length_mismatch(self):
        with pytest.raises(InvalidParameterError):
            hamming_distance([1, 2], [1, 2, 3])

    @given(st.integers(1, 8).flatmap(lambda n: st.tuples(*[st.lists(st.integers(0, 2), min_size=n, max_size=n)] * 3)))
    def test_metric(self, triple):
        a, b, c = triple
        assert hamming_distance(a, a) == 0
        assert hamming_distance(a, b) == hamming_distance(b, a)
        assert hamming_distance(a, c) <= hamming_distance(a, b) + hamming_distance(b, c)


class TestMedian:
    def test_left_median_index(self):
        assert left_median_index(4) == 2
        assert left_median_index(100) == 50
        assert left_median_index(5) == 2
        with pytest.raises(TooFewPointsError):
            left_median_index(1)

    def test_examples(self):
        assert empirical_median([1, 2, 3, 4]) == 2
        assert empirical_median([7, 7]) == 7
        # odd n takes floor(n/2) literally
        assert empirical_median([1, 2, 3]) == 1

    def test_too_few(self):
        with pytest.raises(TooFewPointsError):
            empirical_median([1.0])

    @given(st.lists(st.integers(-1000, 1000), min_size=2, max_size=40), st.integers(-1000, 1000))
    def test_translation_equivariant(self, xs, c):
        x = np.array(xs, dtype=float)
        assert empirical_median(x + c) == empirical_median(x) + c

    def test_sorted_sample_passthrough(self):
        s = sort_sample([5.0, 1.0, 3.0, 2.0])
        assert isinstance(s, SortedSample)
        assert empirical_median(s) == 2.0


class TestLaplace:
    def test_mean_and_median_tail(self):
        z = sample_standard_laplace(NoiseSource(11), 1_000_000)
        assert abs(z.mean()) <= 0.01
        assert abs(np.mean(np.abs(z) > math.log(2)) - 0.5) <= 0.005

    @pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
    def test_tail_within_four_sd(self, t):
        z = NoiseSource(12).standard_laplace(1_000_000)
        p = math.exp(-t)
        sd = math.sqrt(p * (1 - p) / z.size)
        assert abs(np.mean(np.abs(z) > t) - p) <= 4 * sd

    def test_same_seed_same_sequence(self):
        a = NoiseSource(99).standard_laplace(1000)
        b = NoiseSource(99).standard_laplace(1000)
        np.testing.assert_array_equal(a, b)
        assert NoiseSource(99).standard_laplace() == NoiseSource(99).standard_laplace()

    def test_scalar_matches_vector_path(self):
        a = NoiseSource(5)
        b = NoiseSource(5)
        assert [a.standard_laplace() for _ in range(5)] == b.standard_laplace(5).tolist()

    def test_open_uniform_never_hits_endpoints(self):
        u = NoiseSource(1).open_uniform(100_000)
        assert u.min() > 0 and u.max() < 1

    def test_spawned_streams_differ(self):
        a, b = NoiseSource(3).spawn(2)
        assert not np.array_equal(a.standard_laplace(10), b.standard_laplace(10))

    def test_derive_seed_deterministic_and_distinct(self):
        seeds = [derive_seed(7, i) for i in range(1000)]
        assert seeds == [derive_seed(7, i) for i in range(1000)]
        assert len(set(seeds)) == 1000
        assert all(0 <= s < 2**63 for s in seeds)

    def test_constant_noise(self):
        c = ConstantNoise(0.25)
        assert [c.standard_laplace() for _ in range(3)] == [0.25] * 3
        seq = ConstantNoise([1.0, -2.0])
        assert seq.standard_laplace() == 1.0
        assert seq.standard_laplace() == -2.0
        with pytest.raises(RuntimeError):
            seq.standard_laplace()


def test_as_sample_min_size():
    assert as_sample([1.0], min_size=1).tolist() == [1.0]
    with pytest.raises(TooFewPointsError):
        as_sample([], min_size=1)
