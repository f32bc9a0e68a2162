"""Monte-Carlo deviation experiments, the median-of-means negative result, and configs."""

from __future__ import annotations

import dataclasses
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from dploc.bounds import (
    BoundValue,
    RegularityProfile,
    empirical_median_bound,
    mom_bound,
    ptr_median_bound,
    smooth_median_bound,
)
from dploc.core_numeric import InvalidParameterError, NoiseSource, derive_seed, empirical_median
from dploc.harness.distributions import DistributionSpec, generate_sample, regularity_profile
from dploc.mean_estimators import (
    blocks_for_alpha,
    dp_mom_smooth,
    median_of_means,
    min_block_gap,
    partition_blocks,
    truncated_mom,
)
from dploc.median_dp import (
    NO_REPLY,
    NoReply,
    PrivacyBudget,
    calibrate_eta,
    ptr_median,
    smooth_dp_median,
)
from dploc.sensitivity import beta_from_budget

__all__ = [
    "METHODS",
    "ConfigError",
    "ExperimentConfig",
    "TrialRow",
    "DeviationReport",
    "NegativeResultReport",
    "run_deviation_experiment",
    "run_negative_result_experiment",
    "run_block_gap_diagnostic",
]

METHODS = ("smooth", "ptr", "emp_median", "mom", "dp_mom", "trunc_mom")
_DP_METHODS = {"smooth", "ptr", "dp_mom"}
_MEAN_METHODS = {"mom", "dp_mom", "trunc_mom"}


class ConfigError(InvalidParameterError):
    """Experiment configuration is malformed or violates a bound's preconditions."""


@dataclass(frozen=True)
class ExperimentConfig:
    distribution: DistributionSpec
    n: int
    trials: int
    method: str
    alpha: float
    base_seed: int = 0
    epsilon: float | None = None
    delta: float | None = None
    T: float | None = None
    N: int | None = None
    r: float | None = None
    L: float | None = None
    R: float | None = None
    eta: float | None = None
    a_hat_rule: str = "window"
    workers: int = 1

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}; choose from {METHODS}")
        if self.trials < 100:
            raise ConfigError(f"trials must be at least 100, got {self.trials}")
        if self.n < 2:
            raise ConfigError(f"n must be at least 2, got {self.n}")
        if not (0 < self.alpha < 1):
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.workers < 1:
            raise ConfigError(f"workers must be positive, got {self.workers}")
        if self.method in _DP_METHODS and (self.epsilon is None or self.delta is None):
            raise ConfigError(f"method {self.method} needs epsilon and delta")
        if self.method == "smooth" and (self.T is None or self.r is None):
            raise ConfigError("method smooth needs T and r")
        if self.method == "ptr" and self.r is None:
            raise ConfigError("method ptr needs r (for eta calibration and the bound)")
        if self.method == "emp_median" and self.r is None and self.L is None:
            raise ConfigError("method emp_median needs r or L")
        if self.a_hat_rule not in ("window", "reach"):
            raise ConfigError(f"a_hat_rule must be 'window' or 'reach', got {self.a_hat_rule!r}")

    @property
    def budget(self) -> PrivacyBudget | None:
        if self.epsilon is None or self.delta is None:
            return None
        return PrivacyBudget(self.epsilon, self.delta)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        missing = {"distribution", "n", "trials", "method", "alpha"} - set(d)
        if missing:
            raise ConfigError(f"missing config keys: {sorted(missing)}")
        dist = d["distribution"]
        if not isinstance(dist, dict) or set(dist) - {"family", "params"} or "family" not in dist:
            raise ConfigError("distribution must be an object with keys 'family' and optional 'params'")
        try:
            return cls(**{**d, "distribution": DistributionSpec(dist["family"], dict(dist.get("params", {})))})
        except ConfigError:
            raise
        except (InvalidParameterError, TypeError) as exc:
            raise ConfigError(str(exc)) from exc

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["distribution"] = self.distribution.to_dict()
        return d


@dataclass(frozen=True)
class TrialRow:
    trial_index: int
    seed: int
    estimate: float | NoReply
    abs_error: float | None
    within_bound: bool


@dataclass
class DeviationReport:
    config: ExperimentConfig
    rows: list[TrialRow]
    target: float
    bound_value: float
    bound_terms: dict[str, float]
    eta: float | None = None
    runtime_seconds: float = 0.0

    @property
    def errors(self) -> np.ndarray:
        return np.array([r.abs_error for r in self.rows if r.abs_error is not None])

    @property
    def no_reply_count(self) -> int:
        return sum(r.estimate is NO_REPLY for r in self.rows)

    @property
    def no_reply_rate(self) -> float:
        return self.no_reply_count / len(self.rows)

    @property
    def coverage(self) -> float:
        """Fraction of all trials within the bound; a no-reply counts as a miss."""
        return sum(r.within_bound for r in self.rows) / len(self.rows)

    @property
    def error_quantile(self) -> float | None:
        errs = self.errors
        return float(np.quantile(errs, 1.0 - self.config.alpha)) if errs.size else None

    def summary(self) -> dict:
        return {
            "method": self.config.method,
            "n": self.config.n,
            "trials": len(self.rows),
            "target": self.target,
            "bound_value": self.bound_value,
            "bound_terms": self.bound_terms,
            "eta": self.eta,
            "coverage": self.coverage,
            "no_reply_count": self.no_reply_count,
            "no_reply_rate": self.no_reply_rate,
            "error_quantile": self.error_quantile,
            "runtime_seconds": self.runtime_seconds,
        }


@dataclass(frozen=True)
class _Plan:
    target: float
    bound: BoundValue
    estimate: Callable[[np.ndarray, NoiseSource], "float | NoReply"]
    eta: float | None = None


def _profile(cfg: ExperimentConfig) -> RegularityProfile:
    base = regularity_profile(cfg.distribution, cfg.r, cfg.R)
    return dataclasses.replace(base, L=cfg.L) if cfg.L is not None else base


def _mean_setup(cfg: ExperimentConfig):
    spec = cfg.distribution
    if spec.variance is None:
        raise ConfigError(f"{spec.family} with {spec.p} has infinite variance; "
                          "median-of-means bounds need two finite moments")
    N = cfg.N if cfg.N is not None else blocks_for_alpha(cfg.alpha)
    part = partition_blocks(cfg.n, N)
    sigma = math.sqrt(spec.variance)
    bound = BoundValue(total=mom_bound(sigma, cfg.n, cfg.alpha), terms={"mom": mom_bound(sigma, cfg.n, cfg.alpha)})
    return part, bound


def _plan(cfg: ExperimentConfig) -> _Plan:
    """Validate every precondition and fix the bound before any trial runs."""
    try:
        return _build_plan(cfg)
    except ConfigError:
        raise
    except InvalidParameterError as exc:
        raise ConfigError(str(exc)) from exc


def _build_plan(cfg: ExperimentConfig) -> _Plan:
    spec = cfg.distribution
    budget = cfg.budget
    m = cfg.method
    if m == "emp_median":
        L = cfg.L if cfg.L is not None else _profile(cfg).L
        b = empirical_median_bound(cfg.n, L, cfg.alpha, cfg.r)
        return _Plan(spec.median, BoundValue(b, {"subgaussian": b}), lambda x, rng: empirical_median(x))
    if m == "smooth":
        prof = _profile(cfg)
        bound = smooth_median_bound(cfg.n, prof, cfg.T, budget, cfg.alpha)
        T = cfg.T
        return _Plan(spec.median, bound, lambda x, rng: smooth_dp_median(x, T, budget, rng))
    if m == "ptr":
        prof = _profile(cfg)
        bound = ptr_median_bound(cfg.n, prof, budget, cfg.alpha)
        eta = cfg.eta if cfg.eta is not None else calibrate_eta(cfg.n, budget, cfg.alpha, prof.L, prof.r).eta
        rule = cfg.a_hat_rule
        return _Plan(spec.median, bound, lambda x, rng: ptr_median(x, eta, budget, rng, a_hat_rule=rule), eta)
    part, bound = _mean_setup(cfg)
    T = cfg.T if cfg.T is not None else math.sqrt(cfg.n)
    if m == "mom":
        est = lambda x, rng: median_of_means(x, part)  # noqa: E731
    elif m == "trunc_mom":
        est = lambda x, rng: truncated_mom(x, part, T)  # noqa: E731
    else:
        est = lambda x, rng: dp_mom_smooth(x, part, T, budget, rng)  # noqa: E731
    return _Plan(spec.mean, bound, est)


def _trial_streams(base_seed: int, index: int) -> tuple[int, NoiseSource, NoiseSource]:
    seed = derive_seed(base_seed, index)
    data_rng, mech_rng = NoiseSource(seed).spawn(2)
    return seed, data_rng, mech_rng


def run_deviation_experiment(cfg: ExperimentConfig) -> DeviationReport:
    """Run ``cfg.trials`` independent trials and score them against the matching bound.

    Trial ``i`` draws its data and noise from streams derived from
    ``(base_seed, i)``, so results do not depend on ``cfg.workers``.
    """
    plan = _plan(cfg)
    start = time.perf_counter()

    def one(i: int) -> TrialRow:
        seed, data_rng, mech_rng = _trial_streams(cfg.base_seed, i)
        x = generate_sample(cfg.distribution, cfg.n, data_rng)
        est = plan.estimate(x, mech_rng)
        if est is NO_REPLY:
            return TrialRow(i, seed, NO_REPLY, None, False)
        err = abs(float(est) - plan.target)
        return TrialRow(i, seed, float(est), err, err <= plan.bound.total)

    if cfg.workers == 1:
        rows = [one(i) for i in range(cfg.trials)]
    else:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            rows = list(pool.map(one, range(cfg.trials)))
    return DeviationReport(cfg, rows, plan.target, plan.bound.total, dict(plan.bound.terms), plan.eta,
                           time.perf_counter() - start)


@dataclass
class NegativeResultReport:
    n: int
    n_used: int
    N: int
    T: float
    beta: float
    epsilon: float
    delta: float
    alpha: float
    sigma: float
    nonprivate_scale: float
    noise_floor: float
    quantiles_mom: list[float] = field(default_factory=list)
    quantiles_dp: list[float] = field(default_factory=list)
    noise_magnitudes: list[float] = field(default_factory=list)
    sensitivities: list[float] = field(default_factory=list)
    floor_violations: int = 0

    @property
    def ratios(self) -> list[float]:
        return [d / m for d, m in zip(self.quantiles_dp, self.quantiles_mom)]

    @property
    def dp_worse_every_time(self) -> bool:
        return all(r > 1 for r in self.ratios)

    def summary(self) -> dict:
        noise = np.array(self.noise_magnitudes)
        return {
            "n": self.n, "n_used": self.n_used, "N": self.N, "T": self.T, "beta": self.beta,
            "epsilon": self.epsilon, "delta": self.delta, "alpha": self.alpha, "sigma": self.sigma,
            "nonprivate_scale": self.nonprivate_scale,
            "noise_floor": self.noise_floor,
            "quantiles_mom": self.quantiles_mom,
            "quantiles_dp_mom": self.quantiles_dp,
            "ratios": self.ratios,
            "noise_magnitude": {"min": float(noise.min()), "median": float(np.median(noise)),
                                "max": float(noise.max())},
            "floor_violations": self.floor_violations,
            "dp_worse_every_time": self.dp_worse_every_time,
        }


def run_negative_result_experiment(cfg: ExperimentConfig, repetitions: int = 20) -> NegativeResultReport:
    """Paired median-of-means vs smooth-sensitivity DP median-of-means trials.

    ``N`` defaults to ``ceil(8 log(2/alpha))`` and ``T`` to ``sqrt(n)``. When
    ``N`` does not divide ``n`` the sample is trimmed to ``N * floor(n/N)``
    points. Each trial checks the deterministic noise floor
    ``S >= 2T exp(-beta N)``.
    """
    spec = cfg.distribution
    if spec.variance is None:
        raise ConfigError(f"{spec.family} with {spec.p} has infinite variance; "
                          "median-of-means needs two finite moments")
    if cfg.epsilon is None or cfg.delta is None:
        raise ConfigError("negative-result experiment needs epsilon and delta")
    N = cfg.N if cfg.N is not None else blocks_for_alpha(cfg.alpha)
    if N < 2:
        raise ConfigError(f"need at least 2 blocks, got N={N}")
    if repetitions < 1:
        raise ConfigError(f"repetitions must be positive, got {repetitions}")
    n_used = N * (cfg.n // N)
    part = partition_blocks(n_used, N)
    T = cfg.T if cfg.T is not None else math.sqrt(cfg.n)
    budget = cfg.budget
    beta = beta_from_budget(budget.epsilon, budget.delta)
    sigma = math.sqrt(spec.variance)
    floor = 2.0 * T * math.exp(-beta * N)
    report = NegativeResultReport(
        n=cfg.n, n_used=n_used, N=N, T=T, beta=beta, epsilon=budget.epsilon, delta=budget.delta,
        alpha=cfg.alpha, sigma=sigma, nonprivate_scale=2.0 * sigma * math.sqrt(math.log(2.0 / cfg.alpha) / cfg.n),
        noise_floor=floor)
    mu = spec.mean
    for rep in range(repetitions):
        rep_seed = derive_seed(cfg.base_seed, rep)
        err_mom, err_dp = [], []
        for i in range(cfg.trials):
            _, data_rng, mech_rng = _trial_streams(rep_seed, i)
            x = generate_sample(spec, cfg.n, data_rng)[:n_used]
            err_mom.append(abs(median_of_means(x, part) - mu))
            value, sens = dp_mom_smooth(x, part, T, budget, mech_rng, return_sensitivity=True)
            err_dp.append(abs(value - mu))
            report.sensitivities.append(sens)
            report.noise_magnitudes.append(2.0 / budget.epsilon * sens)
            if not sens >= floor:
                report.floor_violations += 1
        report.quantiles_mom.append(float(np.quantile(err_mom, 1.0 - cfg.alpha)))
        report.quantiles_dp.append(float(np.quantile(err_dp, 1.0 - cfg.alpha)))
    return report


def run_block_gap_diagnostic(spec: DistributionSpec, n: int, N: int, trials: int,
                             alphas=(0.5, 0.1, 0.05, 0.01), base_seed: int = 0) -> dict:
    """Distribution of the smallest gap between block means, next to ``1/sqrt(n alpha)``.

    Descriptive only; nothing here is asserted.
    """
    part = partition_blocks(n, N)
    gaps = np.empty(trials)
    for i in range(trials):
        _, data_rng, _ = _trial_streams(base_seed, i)
        gaps[i] = min_block_gap(generate_sample(spec, n, data_rng), part)
    return {
        "n": n, "N": N, "trials": trials,
        "median_min_gap": float(np.median(gaps)),
        "quantiles": {str(q): float(np.quantile(gaps, q)) for q in (0.05, 0.25, 0.5, 0.75, 0.95)},
        "reference_1_over_sqrt_n_alpha": {str(a): 1.0 / math.sqrt(n * a) for a in alphas},
    }
