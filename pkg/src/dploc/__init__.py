"""Differentially private location estimators with sub-Gaussian deviations.

The two median estimators are `smooth_dp_median` (smooth-sensitivity
Laplace release of the truncated median) and `ptr_median`
(propose-test-release). Closed-form deviation bounds live in
`dploc.bounds`; Monte-Carlo and audit machinery in `dploc.harness` and
`dploc.privacy_audit`.
"""

from dploc.core_numeric import (
    ConstantNoise,
    InvalidParameterError,
    NoiseSource,
    SortedSample,
    TooFewPointsError,
    empirical_median,
    hamming_distance,
    left_median_index,
    order_stat,
    sort_sample,
    truncate,
)
from dploc.median_dp import (
    NO_REPLY,
    NoReply,
    PrivacyBudget,
    a_hat,
    a_hat_window,
    calibrate_eta,
    ptr_median,
    smooth_dp_median,
)
from dploc.sensitivity import (
    beta_from_budget,
    brute_force_smooth_sensitivity,
    smooth_sensitivity_truncated_median,
)

__version__ = "0.1.0"

__all__ = [
    "ConstantNoise",
    "InvalidParameterError",
    "NoiseSource",
    "SortedSample",
    "TooFewPointsError",
    "empirical_median",
    "hamming_distance",
    "left_median_index",
    "order_stat",
    "sort_sample",
    "truncate",
    "NO_REPLY",
    "NoReply",
    "PrivacyBudget",
    "a_hat",
    "a_hat_window",
    "calibrate_eta",
    "ptr_median",
    "smooth_dp_median",
    "beta_from_budget",
    "brute_force_smooth_sensitivity",
    "smooth_sensitivity_truncated_median",
]
