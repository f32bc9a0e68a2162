"""Closed-form deviation bounds (natural logarithms throughout).

Each calculator validates its admissible ``alpha`` range and raises rather
than clamping: outside the range the guarantee simply does not hold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from dploc.core_numeric import InvalidParameterError
from dploc.mean_estimators import blocks_for_alpha
from dploc.median_dp import PrivacyBudget, calibrate_eta

__all__ = [
    "RegularityProfile",
    "BoundValue",
    "subgaussian_mean_bound",
    "empirical_median_bound",
    "smooth_median_bound",
    "ptr_median_bound",
    "mom_bound",
]


@dataclass(frozen=True)
class RegularityProfile:
    """Density at least ``L`` on ``[m - r, m + r]``, with ``|m| <= R``."""

    m: float
    L: float
    r: float
    R: float

    def __post_init__(self):
        if not (self.L > 0 and self.r > 0):
            raise InvalidParameterError(f"L and r must be positive, got L={self.L}, r={self.r}")
        if abs(self.m) > self.R:
            raise InvalidParameterError(f"|m|={abs(self.m)} exceeds R={self.R}")
        if 2 * self.L * self.r > 1 + 1e-12:
            raise InvalidParameterError(
                f"2*L*r={2 * self.L * self.r} > 1: no density can stay above L on [m-r, m+r]")


@dataclass(frozen=True)
class BoundValue:
    total: float
    terms: dict[str, float]
    notes: dict[str, str] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"total": self.total, "terms": dict(self.terms), "notes": dict(self.notes)}


def _make_bound(terms: dict[str, float], notes: dict[str, str] | None = None) -> BoundValue:
    return BoundValue(total=math.fsum(terms.values()), terms=terms, notes=notes or {})


def _check_alpha_open(alpha: float) -> None:
    if not (0 < alpha < 1):
        raise InvalidParameterError(f"alpha must lie in (0, 1), got {alpha}")


def subgaussian_mean_bound(sigma: float, n: int, alpha: float) -> float:
    """``sqrt(2 sigma^2 log(2/alpha) / n)``: empirical mean of sub-Gaussian data."""
    if not (sigma > 0):
        raise InvalidParameterError(f"sigma must be positive, got {sigma}")
    if n < 1:
        raise InvalidParameterError(f"n must be at least 1, got {n}")
    _check_alpha_open(alpha)
    return math.sqrt(2.0 * sigma**2 * math.log(2.0 / alpha) / n)


def empirical_median_bound(n: int, L: float, alpha: float, r: float | None = None) -> float:
    """``sqrt(2 log(2/alpha) / (n L^2))`` for the (truncated) empirical median.

    If `r` is given, ``alpha`` must be at least ``2 exp(-n L^2 r^2 / 2)``:
    the density floor only holds on an ``r``-neighborhood of the median.
    """
    if not (L > 0):
        raise InvalidParameterError(f"L must be positive, got {L}")
    if n < 1:
        raise InvalidParameterError(f"n must be at least 1, got {n}")
    if not (0 < alpha <= 1):
        raise InvalidParameterError(f"alpha must lie in (0, 1], got {alpha}")
    if r is not None:
        floor = 2.0 * math.exp(-n * L**2 * r**2 / 2.0)
        if alpha < floor:
            raise InvalidParameterError(
                f"alpha={alpha} below 2 exp(-n L^2 r^2 / 2) = {floor:.6g}; the density floor "
                f"only covers an r={r} neighborhood of the median")
    return math.sqrt(2.0 * math.log(2.0 / alpha) / (n * L**2))


def smooth_median_bound(n: int, profile: RegularityProfile, T: float, budget: PrivacyBudget,
                        alpha: float) -> BoundValue:
    """Three-term deviation bound for the smooth-sensitivity DP median.

    Terms: sub-Gaussian ``sqrt(2 log(8/a) / (n L^2))``; privacy
    ``4 log(8/a) log(2/d) / (e L eps^2 n) * (log floor(L r n / 2) + log(4/a))``;
    truncation ``4 T log(4/a) / eps * exp(-eps L r n / (4 log(2/d)))``.
    """
    L, r = profile.L, profile.r
    eps, delta = budget.epsilon, budget.delta
    if not (T > profile.R + r):
        raise InvalidParameterError(f"need T > R + r = {profile.R + r}, got T={T}")
    floor = 8.0 * math.exp(-n * L**2 * r**2 / 4.0)
    if not (floor <= alpha <= 1):
        raise InvalidParameterError(f"alpha={alpha} outside [8 exp(-n L^2 r^2 / 4), 1] = [{floor:.6g}, 1]")
    k0 = math.floor(L * r * n / 2.0)
    if k0 < 1:
        raise InvalidParameterError(f"floor(L r n / 2) = {k0}; need at least 1")
    log8 = math.log(8.0 / alpha)
    log4 = math.log(4.0 / alpha)
    log2d = math.log(2.0 / delta)
    terms = {
        "subgaussian": math.sqrt(2.0 * log8 / (n * L**2)),
        "privacy": 4.0 * log8 * log2d / (math.e * L * eps**2 * n) * (math.log(k0) + log4),
        "truncation": 4.0 * T * log4 / eps * math.exp(-eps * L * r * n / (4.0 * log2d)),
    }
    return _make_bound(terms, {"log_floor_term": f"log(floor(L*r*n/2)) with floor(L*r*n/2) = {k0}"})


def ptr_median_bound(n: int, profile: RegularityProfile, budget: PrivacyBudget, alpha: float) -> BoundValue:
    """Two-term bound for the propose-test-release median at the calibrated ``eta``.

    The second term is ``eta / eps * log(8/alpha)``: linear, not square-root,
    in ``log(1/alpha)``.
    """
    cal = calibrate_eta(n, budget, alpha, profile.L, profile.r)
    log8 = math.log(8.0 / alpha)
    eps = budget.epsilon
    terms = {
        "subgaussian": math.sqrt(2.0 * log8 / (n * profile.L**2)),
        "privacy": cal.c_const * math.log(n) * (math.log(2.0 / budget.delta) + log8 + eps) * log8 / (eps**2 * n),
    }
    return _make_bound(terms, {"C": repr(cal.c_const), "eta": repr(cal.eta)})


def mom_bound(sigma: float, n: int, alpha: float) -> float:
    """``2 sigma sqrt(log(2/alpha) / n)`` for median of means with ``ceil(8 log(2/alpha))`` blocks."""
    if not (sigma > 0):
        raise InvalidParameterError(f"sigma must be positive, got {sigma}")
    _check_alpha_open(alpha)
    need = blocks_for_alpha(alpha)
    if n < need:
        raise InvalidParameterError(f"n={n} smaller than the {need} blocks needed at alpha={alpha}")
    return 2.0 * sigma * math.sqrt(math.log(2.0 / alpha) / n)
