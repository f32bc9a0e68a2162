"""Differentially private medians: smooth-sensitivity release and propose-test-release.

Two breakdown statistics are provided for the propose-test-release
estimator:

* `a_hat` is the reachability form: the fewest replacements that move the
  left median by more than ``eta``. With ``k`` replacements the median can
  reach exactly ``[x_(l-k), x_(l+k)]``.
* `a_hat_window` is the window form: the smallest ``k`` such that some run
  of ``k + 1`` consecutive gaps containing the median spans more than
  ``eta``.

The mechanism adds ``Lap(1/eps)`` noise to the statistic, which is only
valid when one replacement changes it by at most 1. The window form has
that property. The reachability form does not: moving one point across the
median can shift its center so that both one-sided reaches grow by 2 (see
``tests/test_median_dp.py::test_reachability_form_can_jump_by_two``).
`ptr_median` therefore uses the window form unless told otherwise.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Literal, Union

import numpy as np

from dploc.core_numeric import (
    InvalidParameterError,
    NoiseSource,
    SortedSample,
    as_sorted,
    left_median_index,
    order_stat,
    padded_order_stats,
    truncate,
)
from dploc.sensitivity import beta_from_budget, smooth_sensitivity_truncated_median

__all__ = [
    "PrivacyBudget",
    "NoReply",
    "NO_REPLY",
    "ReleaseOutcome",
    "PtrCalibration",
    "PtrSamples",
    "truncated_median",
    "smooth_dp_median",
    "sample_smooth_dp_median",
    "a_hat",
    "a_hat_window",
    "no_reply_threshold",
    "ptr_median",
    "sample_ptr_median",
    "calibrate_eta",
    "calibrate_eta_general",
    "no_reply_probability_bound",
]


@dataclass(frozen=True)
class PrivacyBudget:
    epsilon: float
    delta: float

    def __post_init__(self):
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise InvalidParameterError(f"epsilon must be positive and finite, got {self.epsilon}")
        if not (0 < self.delta < 1):
            raise InvalidParameterError(f"delta must lie in (0, 1), got {self.delta}")

    @classmethod
    def ptr_from_total(cls, total_epsilon: float, delta: float) -> "PrivacyBudget":
        """Per-step budget whose propose-test-release run costs ``(total_epsilon, delta)``."""
        return cls(total_epsilon / 2.0, delta)


class NoReply(enum.Enum):
    """The "no reply" outcome of propose-test-release."""

    TOKEN = "NOREPLY"

    def __repr__(self) -> str:
        return "NO_REPLY"

    def __str__(self) -> str:
        return self.value


NO_REPLY = NoReply.TOKEN
ReleaseOutcome = Union[float, NoReply]


@dataclass(frozen=True)
class PtrCalibration:
    eta: float
    c_const: float
    n: int
    epsilon: float
    delta: float
    tau1: float
    L: float
    r: float
    alpha: float | None = None


@dataclass(frozen=True)
class PtrSamples:
    """Many independent releases on one dataset.

    `values` holds NaN exactly where `no_reply` is set; callers should branch
    on the mask.
    """

    values: np.ndarray
    no_reply: np.ndarray

    @property
    def no_reply_rate(self) -> float:
        return float(np.mean(self.no_reply))


def truncated_median(x, T: float) -> float:
    s = as_sorted(x)
    return truncate(order_stat(s, left_median_index(s.n)), T)


def smooth_dp_median(x, T: float, budget: PrivacyBudget, rng: NoiseSource, *,
                     log_inverse_delta: bool = False) -> float:
    """(eps, delta)-DP median of data truncated at ``T``.

    Returns ``m_T(x) + (2 Z / eps) * S(x)`` with ``S`` the smooth sensitivity
    at ``beta = eps / (2 log(2/delta))`` and ``Z ~ Lap(1)`` drawn from `rng`.
    """
    s = as_sorted(x)
    beta = beta_from_budget(budget.epsilon, budget.delta, log_inverse_delta=log_inverse_delta)
    sens = smooth_sensitivity_truncated_median(s, T, beta)
    z = rng.standard_laplace()
    return truncated_median(s, T) + (2.0 * z / budget.epsilon) * sens


def sample_smooth_dp_median(x, T: float, budget: PrivacyBudget, rng: NoiseSource, size: int, *,
                            log_inverse_delta: bool = False) -> np.ndarray:
    """`size` independent runs of `smooth_dp_median` on the same data."""
    s = as_sorted(x)
    beta = beta_from_budget(budget.epsilon, budget.delta, log_inverse_delta=log_inverse_delta)
    sens = smooth_sensitivity_truncated_median(s, T, beta)
    z = np.asarray(rng.standard_laplace(size), dtype=float)
    return truncated_median(s, T) + (2.0 / budget.epsilon) * sens * z


def _check_eta(eta: float) -> None:
    if not (eta > 0):
        raise InvalidParameterError(f"eta must be positive, got {eta}")


def _smallest_true(pred, lo: int, hi: int) -> int:
    """Smallest k in [lo, hi] with pred(k) true; pred is monotone and pred(hi) holds."""
    while lo < hi:
        mid = (lo + hi) // 2
        if pred(mid):
            hi = mid
        else:
            lo = mid + 1
    return lo


def a_hat(s, eta: float) -> int:
    """Fewest replacements that move the left median by more than `eta`."""
    _check_eta(eta)
    s = as_sorted(s)
    ell = left_median_index(s.n)
    m = order_stat(s, ell)

    def exceeds(k: int) -> bool:
        return max(order_stat(s, ell + k) - m, m - order_stat(s, ell - k)) > eta

    # k = ell reaches position 0, i.e. -inf
    return _smallest_true(exceeds, 1, ell)


def a_hat_window(s, eta: float) -> int:
    """Smallest ``k >= 1`` with ``max_{0<=t<=k+1} x_(l+t) - x_(l+t-k-1) > eta``."""
    _check_eta(eta)
    s = as_sorted(s)
    ell = left_median_index(s.n)

    def exceeds(k: int) -> bool:
        window = padded_order_stats(s, ell - k - 1, ell + k + 1)
        return bool(np.max(window[k + 1:] - window[:k + 2]) > eta)

    return _smallest_true(exceeds, 1, ell)


_A_HAT_RULES = {"window": a_hat_window, "reach": a_hat}


def no_reply_threshold(budget: PrivacyBudget) -> float:
    return 1.0 + math.log(2.0 / budget.delta) / budget.epsilon


def ptr_median(x, eta: float, budget: PrivacyBudget, rng: NoiseSource, *,
               a_hat_rule: Literal["window", "reach"] = "window") -> ReleaseOutcome:
    """Propose-test-release median; ``(2 eps, delta)``-DP for ``budget = (eps, delta)``.

    Draws ``Z1`` then ``Z2`` (both always consumed). Returns `NO_REPLY` when
    ``A(x) + Z1/eps <= 1 + log(2/delta)/eps``, otherwise
    ``median(x) + (eta/eps) Z2``.
    """
    s = as_sorted(x)
    a = _A_HAT_RULES[a_hat_rule](s, eta)
    z1 = rng.standard_laplace()
    z2 = rng.standard_laplace()
    if a + z1 / budget.epsilon <= no_reply_threshold(budget):
        return NO_REPLY
    return order_stat(s, left_median_index(s.n)) + (eta / budget.epsilon) * z2


def sample_ptr_median(x, eta: float, budget: PrivacyBudget, rng: NoiseSource, size: int, *,
                      a_hat_rule: Literal["window", "reach"] = "window") -> PtrSamples:
    s = as_sorted(x)
    a = _A_HAT_RULES[a_hat_rule](s, eta)
    z1 = np.asarray(rng.standard_laplace(size), dtype=float)
    z2 = np.asarray(rng.standard_laplace(size), dtype=float)
    no_reply = a + z1 / budget.epsilon <= no_reply_threshold(budget)
    released = order_stat(s, left_median_index(s.n)) + (eta / budget.epsilon) * z2
    return PtrSamples(np.where(no_reply, np.nan, released), no_reply)


def _gap_constant(n: int, L: float, r: float, gap_level: float) -> float:
    if not (L > 0 and r > 0):
        raise InvalidParameterError(f"L and r must be positive, got L={L}, r={r}")
    half = L * r * n / 2.0
    if not (half > 1):
        raise InvalidParameterError(f"need L*r*n/2 > 1 so that log(L*r*n/2) > 0, got {half}")
    return (1.0 + math.log(1.0 / gap_level) / math.log(half)) / L


def calibrate_eta_general(n: int, budget: PrivacyBudget, tau1: float, L: float, r: float, *,
                          gap_level: float) -> PtrCalibration:
    """Proposal ``eta`` giving no-reply probability about ``tau1`` (plus a data term).

    ``C = (1 + log(1/gap_level) / log(L r n / 2)) / L`` controls the order
    statistic gaps near the median, and
    ``eta = C log(n) / (eps n) * (log(2/delta) + log(2/tau1) + eps)``.
    """
    if not (0 < tau1 <= 1):
        raise InvalidParameterError(f"tau1 must lie in (0, 1], got {tau1}")
    if not (0 < gap_level <= 1):
        raise InvalidParameterError(f"gap_level must lie in (0, 1], got {gap_level}")
    if n < 2:
        raise InvalidParameterError(f"n must be at least 2, got {n}")
    c_const = _gap_constant(n, L, r, gap_level)
    eps, delta = budget.epsilon, budget.delta
    eta = c_const * math.log(n) / (eps * n) * (math.log(2.0 / delta) + math.log(2.0 / tau1) + eps)
    return PtrCalibration(eta=eta, c_const=c_const, n=n, epsilon=eps, delta=delta, tau1=tau1, L=L, r=r)


def alpha_floor_ptr(n: int, L: float, r: float) -> float:
    return 8.0 * math.exp(-(L * r) ** 2 * n / 2.0)


def calibrate_eta(n: int, budget: PrivacyBudget, alpha: float, L: float, r: float) -> PtrCalibration:
    """``eta`` for confidence level ``1 - alpha``: the general rule at ``tau1 = gap_level = alpha/4``."""
    floor = alpha_floor_ptr(n, L, r)
    if not (floor <= alpha <= 1):
        raise InvalidParameterError(
            f"alpha={alpha} outside [8 exp(-L^2 r^2 n / 2), 1] = [{floor:.6g}, 1]"
            " required by the propose-test-release deviation bound")
    cal = calibrate_eta_general(n, budget, alpha / 4.0, L, r, gap_level=alpha / 4.0)
    return PtrCalibration(**{**cal.__dict__, "alpha": alpha})


def no_reply_probability_bound(tau1: float, alpha1: float, n: int, L: float, r: float) -> float:
    """``tau1 + alpha1``, valid for ``alpha1 in (2 exp(-L^2 r^2 n / 2), 1]``."""
    floor = 2.0 * math.exp(-(L * r) ** 2 * n / 2.0)
    if not (floor < alpha1 <= 1):
        raise InvalidParameterError(f"alpha1={alpha1} outside ({floor:.6g}, 1]")
    if not (0 < tau1 <= 1):
        raise InvalidParameterError(f"tau1 must lie in (0, 1], got {tau1}")
    return tau1 + alpha1
