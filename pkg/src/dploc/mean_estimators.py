"""Median of means, its truncated and smooth-sensitivity DP variants, and probes.

The DP variant is included to exhibit its failure: truncating block means
at ``T ~ sqrt(n)`` forces a noise floor of ``(2/eps) * 2T exp(-beta N)``
that swamps the statistical error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from dploc.core_numeric import (
    InvalidParameterError,
    NoiseSource,
    as_sample,
    empirical_median,
    truncate,
)
from dploc.median_dp import PrivacyBudget
from dploc.sensitivity import beta_from_budget, smooth_sensitivity_mom

__all__ = [
    "BlockPartition",
    "partition_blocks",
    "blocks_for_alpha",
    "block_means",
    "median_of_means",
    "truncated_mom",
    "dp_mom_smooth",
    "min_block_gap",
]


@dataclass(frozen=True)
class BlockPartition:
    """Contiguous split of ``n`` indices into ``N`` blocks of size ``K``."""

    n: int
    N: int

    @property
    def K(self) -> int:
        return self.n // self.N

    @property
    def assignment(self) -> np.ndarray:
        return np.repeat(np.arange(self.N), self.K)

    def blocks(self) -> list[range]:
        """1-indexed data positions in each block."""
        return [range(j * self.K + 1, (j + 1) * self.K + 1) for j in range(self.N)]


def partition_blocks(n: int, N: int) -> BlockPartition:
    if not (1 <= N <= n):
        raise InvalidParameterError(f"need 1 <= N <= n, got N={N}, n={n}")
    if n % N:
        raise InvalidParameterError(
            f"N={N} does not divide n={n}; trim the sample to {N * (n // N)} points first")
    return BlockPartition(n, N)


def blocks_for_alpha(alpha: float) -> int:
    """``ceil(8 log(2/alpha))`` blocks for confidence ``1 - alpha``."""
    if not (0 < alpha < 1):
        raise InvalidParameterError(f"alpha must lie in (0, 1), got {alpha}")
    return math.ceil(8.0 * math.log(2.0 / alpha))


def block_means(x, p: BlockPartition) -> np.ndarray:
    arr = as_sample(x, min_size=1)
    if arr.shape[0] != p.n:
        raise InvalidParameterError(f"partition is for n={p.n}, sample has {arr.shape[0]} points")
    return arr.reshape(p.N, p.K).mean(axis=1)


def median_of_means(x, p: BlockPartition) -> float:
    means = block_means(x, p)
    if p.N == 1:
        return float(means[0])
    return empirical_median(means)


def truncated_mom(x, p: BlockPartition, T: float) -> float:
    return truncate(median_of_means(x, p), T)


def dp_mom_smooth(x, p: BlockPartition, T: float, budget: PrivacyBudget, rng: NoiseSource, *,
                  return_sensitivity: bool = False):
    """Truncated median of means plus smooth-sensitivity Laplace noise.

    One changed record moves one block mean, so the smooth sensitivity of
    the block-level statistic calibrates the noise. With ``N = 1`` this is
    the truncated mean with noise ``(2Z/eps) * 2T exp(-beta)``.
    """
    means = block_means(x, p)
    beta = beta_from_budget(budget.epsilon, budget.delta)
    if p.N == 1:
        # Only j = 0 and j = 1 terms exist; both windows touch the padding.
        m = truncate(float(means[0]), T)
        sens = max(max(T - m, m + T), 2.0 * T * math.exp(-beta))
        center = m
    else:
        sens = smooth_sensitivity_mom(means, T, beta)
        center = truncate(empirical_median(means), T)
    value = center + (2.0 * rng.standard_laplace() / budget.epsilon) * sens
    return (value, sens) if return_sensitivity else value


def min_block_gap(x, p: BlockPartition) -> float:
    """Smallest gap between consecutive sorted block means."""
    if p.N < 2:
        raise InvalidParameterError(f"need at least 2 blocks, got {p.N}")
    means = np.sort(block_means(x, p))
    return float(np.min(np.diff(means)))
