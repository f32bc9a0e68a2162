"""Local and smooth sensitivities of the (truncated) median and median of means."""

from __future__ import annotations

import itertools
import math

import numpy as np

from dploc.core_numeric import (
    InvalidParameterError,
    SortedSample,
    as_sample,
    as_sorted,
    left_median_index,
    order_stat,
    padded_order_stats,
    truncate,
)

__all__ = [
    "beta_from_budget",
    "local_sensitivity_median",
    "local_sensitivity_truncated_mean",
    "smooth_sensitivity_truncated_median",
    "smooth_sensitivity_mom",
    "brute_force_smooth_sensitivity",
    "BRUTE_FORCE_MAX_N",
]

BRUTE_FORCE_MAX_N = 8


def _check_beta_T(T: float, beta: float) -> None:
    if not (T > 0):
        raise InvalidParameterError(f"T must be positive, got {T}")
    if not (beta > 0):
        raise InvalidParameterError(f"beta must be positive, got {beta}")


def beta_from_budget(epsilon: float, delta: float, *, log_inverse_delta: bool = False) -> float:
    """Smoothing parameter ``eps / (2 log(2/delta))`` for an (eps, delta) budget.

    With ``log_inverse_delta=True`` the more aggressive ``eps / (2 log(1/delta))``
    is returned instead.
    """
    if not (epsilon > 0):
        raise InvalidParameterError(f"epsilon must be positive, got {epsilon}")
    if not (0 < delta < 1):
        raise InvalidParameterError(f"delta must lie in (0, 1), got {delta}")
    log_term = math.log(1.0 / delta) if log_inverse_delta else math.log(2.0 / delta)
    return epsilon / (2.0 * log_term)


def local_sensitivity_median(s) -> float:
    """Largest jump of the left median under one replacement.

    Infinite when the median sits at either end of the sample (``n <= 3``),
    since a single point can then be sent arbitrarily far.
    """
    s = as_sorted(s)
    ell = left_median_index(s.n)
    m = order_stat(s, ell)
    return max(order_stat(s, ell + 1) - m, m - order_stat(s, ell - 1))


def local_sensitivity_truncated_mean(s, T: float) -> float:
    if not (T > 0):
        raise InvalidParameterError(f"T must be positive, got {T}")
    arr = np.sort(as_sample(s.ordered if isinstance(s, SortedSample) else s, min_size=1))
    n = arr.shape[0]
    return max(T - truncate(float(arr[0]), T), truncate(float(arr[-1]), T) + T) / n


def _window_scan(padded: np.ndarray, center: int, k_max: int, beta: float, cap: float) -> float:
    """``max_k exp(-beta k) max_t (P[ell+t] - P[ell+t-k-1])`` over ``k = 0..k_max``.

    `padded` holds positions ``ell-k_max-1 .. ell+k_max+1``; `center` is the
    array index of position ``ell``. Every term is at most ``cap``, so the scan
    stops once ``cap * exp(-beta k)`` can no longer beat the running maximum.
    """
    best = 0.0
    for k in range(k_max + 1):
        weight = math.exp(-beta * k)
        if cap * weight <= best:
            break
        hi = padded[center:center + k + 2]
        lo = padded[center - k - 1:center + 1]
        term = weight * float(np.max(hi - lo))
        if term > best:
            best = term
    return best


def smooth_sensitivity_truncated_median(x, T: float, beta: float, *, k_max: int | None = None) -> float:
    """beta-smooth sensitivity of the left median of data truncated at ``T``.

    Scans ``k = 0..n`` by default; beyond ``k = n`` every window spans the
    full ``[-T, T]`` range and the terms only shrink. Pass a larger `k_max`
    to check that claim.
    """
    _check_beta_T(T, beta)
    s = as_sorted(x)
    y = SortedSample(truncate(s.ordered, T))
    n = y.n
    ell = left_median_index(n)
    k_max = n if k_max is None else int(k_max)
    padded = padded_order_stats(y, ell - k_max - 1, ell + k_max + 1, pad=T)
    return _window_scan(padded, k_max + 1, k_max, beta, 2.0 * T)


def smooth_sensitivity_mom(block_means, T: float, beta: float) -> float:
    """beta-smooth sensitivity of the truncated median of block means.

    Positions outside ``1..N`` are +/- infinity before truncation, so the
    ``j = N`` term always contributes ``2T exp(-beta N)``.
    """
    _check_beta_T(T, beta)
    s = as_sorted(block_means)
    N = s.n
    ell = left_median_index(N)
    padded = truncate(padded_order_stats(s, ell - N - 1, ell + N + 1, pad=math.inf), T)
    return _window_scan(padded, N + 1, N, beta, 2.0 * T)


def _medians_after_one_replacement(states: np.ndarray, candidates: np.ndarray, ell: int) -> np.ndarray:
    """Left medians of every single-coordinate replacement, shape (M, n*c)."""
    M, n = states.shape
    c = candidates.shape[0]
    out = np.empty((M, n, c))
    for i in range(n):
        block = np.repeat(states[:, None, :], c, axis=1)
        block[:, :, i] = candidates[None, :]
        block.sort(axis=2)
        out[:, i, :] = block[:, :, ell - 1]
    return out.reshape(M, n * c)


def brute_force_smooth_sensitivity(x, T: float, beta: float, *, chunk: int = 4096) -> float:
    """Smooth sensitivity of the truncated left median by exhaustive search.

    Enumerates every truncated dataset ``y'`` whose entries come from the
    candidate set ``{-T, T} U {f_T(x_i)}`` and evaluates
    ``exp(-beta d(y, y')) * LS(y')``, where ``LS`` is itself a maximum over
    all single replacements drawn from the same candidates. Restricting to
    these candidates loses nothing: the truncated median only depends on
    order statistics, and pushing a moved point to an existing value or to
    ``+/-T`` never shrinks a gap next to the median.

    The distance from ``y`` to a multiset ``y'`` is ``n`` minus the size of
    the multiset intersection, the fewest coordinates that must change.
    Oracle scale only: refuses ``n > 8``.
    """
    _check_beta_T(T, beta)
    y = np.sort(truncate(as_sample(x), T))
    n = y.shape[0]
    if n > BRUTE_FORCE_MAX_N:
        raise InvalidParameterError(f"brute force is limited to n <= {BRUTE_FORCE_MAX_N}, got {n}")
    ell = left_median_index(n)
    candidates = np.unique(np.concatenate([y, [-T, T]]))
    c = candidates.shape[0]
    y_counts = np.bincount(np.searchsorted(candidates, y), minlength=c)

    combos = np.array(list(itertools.combinations_with_replacement(range(c), n)), dtype=np.intp)
    best = 0.0
    for start in range(0, combos.shape[0], chunk):
        idx = combos[start:start + chunk]
        states = candidates[idx]
        counts = np.zeros((idx.shape[0], c), dtype=np.intp)
        np.add.at(counts, (np.arange(idx.shape[0])[:, None], idx), 1)
        dist = n - np.minimum(counts, y_counts[None, :]).sum(axis=1)
        med = states[:, ell - 1]
        ls = np.max(np.abs(_medians_after_one_replacement(states, candidates, ell) - med[:, None]), axis=1)
        weights = np.array([math.exp(-beta * int(d)) for d in dist])
        best = max(best, float(np.max(weights * ls)))
    return best
