"""Empirical (eps, delta) audits over neighbouring datasets.

An audit can only refute privacy. A passing report means no violation was
detected at the stated sample size, never that the mechanism is private.
The per-cell slack is a 3-sigma binomial allowance with no multiplicity
correction, so the audit works as a regression tripwire, not as a test at
a formal level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from dploc.core_numeric import InvalidParameterError, NoiseSource, as_sample, hamming_distance
from dploc.median_dp import (
    PrivacyBudget,
    PtrSamples,
    a_hat,
    a_hat_window,
    sample_ptr_median,
    sample_smooth_dp_median,
)

__all__ = [
    "STRATEGIES",
    "NeighborPair",
    "AuditReport",
    "make_neighbor_pairs",
    "audit_mechanism",
    "check_a_hat_sensitivity",
    "smooth_median_mechanism",
    "ptr_mechanism",
    "release_minimum_mechanism",
    "pure_noise_mechanism",
]

STRATEGIES = ("random-replace", "outlier-swap", "median-straddle")
OUTLIER_MAGNITUDE = 1e6
MIN_AUDIT_TRIALS = 10_000

Mechanism = Callable[[np.ndarray, NoiseSource, int], "np.ndarray | PtrSamples"]


@dataclass(frozen=True)
class NeighborPair:
    x: np.ndarray
    x_prime: np.ndarray
    strategy: str


def _random_replace(base: np.ndarray, gen: np.random.Generator) -> np.ndarray:
    lo, hi = float(base.min()), float(base.max())
    spread = hi - lo if hi > lo else 1.0
    j = int(gen.integers(base.shape[0]))
    out = base.copy()
    while out[j] == base[j]:
        out[j] = gen.uniform(lo - spread, hi + spread)
    return out


def _outlier_swap(base: np.ndarray, gen: np.random.Generator, side: str | None = None) -> np.ndarray:
    if side is None:
        side = "max" if gen.random() < 0.5 else "min"
    far = max(OUTLIER_MAGNITUDE, 10.0 * float(np.max(np.abs(base))))
    out = base.copy()
    if side == "max":
        out[int(np.argmax(base))] = far
    else:
        out[int(np.argmin(base))] = -far
    return out


def _median_straddle(base: np.ndarray, gen: np.random.Generator) -> np.ndarray:
    n = base.shape[0]
    order = np.argsort(base, kind="stable")
    ordered = base[order]
    ell = n // 2
    rank = int(gen.choice([k for k in (ell - 1, ell, ell + 1) if 1 <= k <= n]))
    lo = ordered[max(ell - 3, 0)]
    hi = ordered[min(ell + 1, n - 1)]
    if hi <= lo:
        lo, hi = lo - 1.0, hi + 1.0
    out = base.copy()
    j = int(order[rank - 1])
    while out[j] == base[j]:
        out[j] = gen.uniform(lo, hi)
    return out


def make_neighbor_pairs(base, strategies: Sequence[str], count: int, rng: NoiseSource) -> list[NeighborPair]:
    """`count` pairs ``(base, x')`` at Hamming distance 1, cycling through `strategies`.

    ``outlier-swap`` sends the minimum or maximum far away, stressing
    sensitivity bounds; ``median-straddle`` moves a point next to the median
    within the surrounding order statistics, stressing the breakdown
    statistic.
    """
    if count < 1:
        raise InvalidParameterError(f"count must be at least 1, got {count}")
    base = as_sample(base, min_size=1).copy()
    unknown = set(strategies) - set(STRATEGIES)
    if unknown or not strategies:
        raise InvalidParameterError(f"unknown or empty strategies: {sorted(unknown)}")
    gen = rng.generator
    makers = {"random-replace": _random_replace, "outlier-swap": _outlier_swap,
              "median-straddle": _median_straddle}
    pairs = []
    for i in range(count):
        strategy = strategies[i % len(strategies)]
        pairs.append(NeighborPair(base, makers[strategy](base, gen), strategy))
    return pairs


@dataclass(frozen=True)
class AuditReport:
    cell_labels: list[str]
    p_x: np.ndarray
    p_x_prime: np.ndarray
    violation_forward: float
    violation_backward: float
    worst_excess: float
    passed: bool
    trials: int
    bins: int
    epsilon: float
    delta: float
    strategy: str

    @property
    def verdict(self) -> str:
        return ("no violation detected at stated power" if self.passed
                else "violation detected")

    def as_dict(self) -> dict:
        return {
            "strategy": self.strategy,
            "epsilon": self.epsilon,
            "delta": self.delta,
            "trials": self.trials,
            "bins": self.bins,
            "cells": self.cell_labels,
            "p_x": self.p_x.tolist(),
            "p_x_prime": self.p_x_prime.tolist(),
            "violation_forward": self.violation_forward,
            "violation_backward": self.violation_backward,
            "worst_excess_over_delta_plus_slack": self.worst_excess,
            "passed": self.passed,
            "verdict": self.verdict,
        }


def _split_outputs(out) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(out, PtrSamples):
        return out.values[~out.no_reply], out.no_reply
    values = np.asarray(out, dtype=float)
    return values, np.zeros(values.shape[0], dtype=bool)


def _cell_probabilities(values, no_reply, edges, trials) -> np.ndarray:
    lo, hi = edges[0], edges[-1]
    central, _ = np.histogram(values[(values >= lo) & (values <= hi)], bins=edges)
    counts = np.concatenate([[np.sum(values < lo)], central, [np.sum(values > hi)], [np.sum(no_reply)]])
    return counts / trials


def audit_mechanism(mechanism: Mechanism, pair: NeighborPair, budget: PrivacyBudget, bins: int,
                    trials: int, rng: NoiseSource) -> AuditReport:
    """Histogram test of ``P[M(x) in B] <= e^eps P[M(x') in B] + delta`` in both directions.

    Cells: `bins` equal-width cells over the pooled 0.5%-99.5% quantile range
    of released values, one tail cell on each side, and a no-reply cell.
    """
    if trials < MIN_AUDIT_TRIALS:
        raise InvalidParameterError(f"trials must be at least {MIN_AUDIT_TRIALS}, got {trials}")
    if bins < 2:
        raise InvalidParameterError(f"bins must be at least 2, got {bins}")
    rng_x, rng_xp = rng.spawn(2)
    v1, nr1 = _split_outputs(mechanism(pair.x, rng_x, trials))
    v2, nr2 = _split_outputs(mechanism(pair.x_prime, rng_xp, trials))

    pooled = np.concatenate([v1, v2])
    if pooled.size:
        lo, hi = np.quantile(pooled, [0.005, 0.995])
    else:
        lo, hi = 0.0, 1.0
    if not hi > lo:
        lo, hi = lo - 0.5, hi + 0.5
    edges = np.linspace(lo, hi, bins + 1)
    p1 = _cell_probabilities(v1, nr1, edges, trials)
    p2 = _cell_probabilities(v2, nr2, edges, trials)

    e_eps = math.exp(budget.epsilon)
    sd1 = np.sqrt(p1 * (1 - p1) / trials)
    sd2 = np.sqrt(p2 * (1 - p2) / trials)
    fwd = p1 - e_eps * p2
    bwd = p2 - e_eps * p1
    excess_fwd = fwd - (budget.delta + 3 * sd1 + 3 * e_eps * sd2)
    excess_bwd = bwd - (budget.delta + 3 * sd2 + 3 * e_eps * sd1)
    worst = float(max(excess_fwd.max(), excess_bwd.max()))

    labels = (["tail<" + repr(float(lo))]
              + [f"[{float(edges[i])!r},{float(edges[i + 1])!r}]" for i in range(bins)]
              + ["tail>" + repr(float(hi)), "NOREPLY"])
    return AuditReport(labels, p1, p2, float(fwd.max()), float(bwd.max()), worst, worst <= 0.0,
                       trials, bins, budget.epsilon, budget.delta, pair.strategy)


def smooth_median_mechanism(T: float, budget: PrivacyBudget) -> Mechanism:
    return lambda x, rng, size: sample_smooth_dp_median(x, T, budget, rng, size)


def ptr_mechanism(eta: float, budget: PrivacyBudget, a_hat_rule: str = "window") -> Mechanism:
    return lambda x, rng, size: sample_ptr_median(x, eta, budget, rng, size, a_hat_rule=a_hat_rule)


def release_minimum_mechanism() -> Mechanism:
    """Non-private control: publishes the sample minimum exactly."""
    return lambda x, rng, size: np.full(size, float(np.min(x)))


def pure_noise_mechanism(scale: float = 1.0) -> Mechanism:
    """Ignores the data entirely."""
    return lambda x, rng, size: scale * np.asarray(rng.standard_laplace(size), dtype=float)


def _random_base(gen: np.random.Generator) -> np.ndarray:
    n = int(gen.integers(2, 61))
    kind = gen.integers(4)
    if kind == 0:
        x = gen.standard_normal(n)
    elif kind == 1:
        x = gen.standard_cauchy(n)
    elif kind == 2:
        x = np.round(gen.standard_normal(n) * 2.0)  # ties
    else:
        x = gen.uniform(0.0, 1.0, n) ** 3
    return x


def check_a_hat_sensitivity(trials: int, rng: NoiseSource, *, a_hat_rule: str = "window") -> int:
    """Count random neighbour pairs whose breakdown statistics differ by more than 1."""
    if trials < 1:
        raise InvalidParameterError(f"trials must be at least 1, got {trials}")
    stat = {"window": a_hat_window, "reach": a_hat}[a_hat_rule]
    gen = rng.generator
    violations = 0
    for i in range(trials):
        base = _random_base(gen)
        strategy = STRATEGIES[int(gen.integers(len(STRATEGIES)))]
        pair = make_neighbor_pairs(base, [strategy], 1, rng)[0]
        assert hamming_distance(pair.x, pair.x_prime) == 1
        spread = float(np.ptp(base)) or 1.0
        eta = spread * 10.0 ** gen.uniform(-3, 0.5)
        if abs(stat(pair.x, eta) - stat(pair.x_prime, eta)) > 1:
            violations += 1
    return violations
