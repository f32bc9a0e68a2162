"""Data-generating distributions with known medians, moments and density floors."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from dploc.bounds import RegularityProfile
from dploc.core_numeric import InvalidParameterError, NoiseSource

__all__ = ["FAMILIES", "DistributionSpec", "generate_sample", "regularity_profile"]

FAMILIES = {
    "uniform": {"low": 0.0, "high": 1.0},
    "gaussian": {"mu": 0.0, "sigma": 1.0},
    "student_t": {"df": 3.0, "loc": 0.0, "scale": 1.0},
    "cauchy": {"loc": 0.0, "scale": 1.0},
    "pareto": {"shape": 2.1, "scale": 1.0},
    "lognormal": {"mu": 0.0, "sigma": 1.0},
}


@dataclass(frozen=True)
class DistributionSpec:
    family: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidParameterError(f"unknown family {self.family!r}; choose from {sorted(FAMILIES)}")
        unknown = set(self.params) - set(FAMILIES[self.family])
        if unknown:
            raise InvalidParameterError(f"unknown parameters for {self.family}: {sorted(unknown)}")
        p = self.p
        positive = {"uniform": [], "gaussian": ["sigma"], "student_t": ["df", "scale"],
                    "cauchy": ["scale"], "pareto": ["shape", "scale"], "lognormal": ["sigma"]}
        for name in positive[self.family]:
            if not (p[name] > 0):
                raise InvalidParameterError(f"{self.family} parameter {name} must be positive, got {p[name]}")
        if self.family == "uniform" and not p["high"] > p["low"]:
            raise InvalidParameterError("uniform requires high > low")

    @property
    def p(self) -> dict:
        return {**FAMILIES[self.family], **self.params}

    def to_dict(self) -> dict:
        return {"family": self.family, "params": dict(self.params)}

    @property
    def median(self) -> float:
        p = self.p
        return {
            "uniform": lambda: (p["low"] + p["high"]) / 2.0,
            "gaussian": lambda: p["mu"],
            "student_t": lambda: p["loc"],
            "cauchy": lambda: p["loc"],
            "pareto": lambda: p["scale"] * 2.0 ** (1.0 / p["shape"]),
            "lognormal": lambda: math.exp(p["mu"]),
        }[self.family]()

    @property
    def mean(self) -> float | None:
        p = self.p
        f = self.family
        if f == "uniform":
            return (p["low"] + p["high"]) / 2.0
        if f == "gaussian":
            return p["mu"]
        if f == "student_t":
            return p["loc"] if p["df"] > 1 else None
        if f == "pareto":
            a = p["shape"]
            return a * p["scale"] / (a - 1.0) if a > 1 else None
        if f == "lognormal":
            return math.exp(p["mu"] + p["sigma"] ** 2 / 2.0)
        return None

    @property
    def variance(self) -> float | None:
        """Population variance, or None when it is infinite or undefined."""
        p = self.p
        f = self.family
        if f == "uniform":
            return (p["high"] - p["low"]) ** 2 / 12.0
        if f == "gaussian":
            return p["sigma"] ** 2
        if f == "student_t":
            return p["scale"] ** 2 * p["df"] / (p["df"] - 2.0) if p["df"] > 2 else None
        if f == "pareto":
            a, xm = p["shape"], p["scale"]
            return xm**2 * a / ((a - 1.0) ** 2 * (a - 2.0)) if a > 2 else None
        if f == "lognormal":
            s2 = p["sigma"] ** 2
            return (math.exp(s2) - 1.0) * math.exp(2.0 * p["mu"] + s2)
        return None

    def pdf(self, u: float) -> float:
        p = self.p
        f = self.family
        if f == "uniform":
            return 1.0 / (p["high"] - p["low"]) if p["low"] <= u <= p["high"] else 0.0
        if f == "gaussian":
            z = (u - p["mu"]) / p["sigma"]
            return math.exp(-z * z / 2.0) / (p["sigma"] * math.sqrt(2.0 * math.pi))
        if f == "student_t":
            nu = p["df"]
            z = (u - p["loc"]) / p["scale"]
            log_c = math.lgamma((nu + 1) / 2) - math.lgamma(nu / 2) - 0.5 * math.log(nu * math.pi)
            return math.exp(log_c - (nu + 1) / 2 * math.log1p(z * z / nu)) / p["scale"]
        if f == "cauchy":
            z = (u - p["loc"]) / p["scale"]
            return 1.0 / (math.pi * p["scale"] * (1.0 + z * z))
        if f == "pareto":
            a, xm = p["shape"], p["scale"]
            return a * xm**a / u ** (a + 1) if u >= xm else 0.0
        if u <= 0:
            return 0.0
        z = (math.log(u) - p["mu"]) / p["sigma"]
        return math.exp(-z * z / 2.0) / (u * p["sigma"] * math.sqrt(2.0 * math.pi))


def generate_sample(spec: DistributionSpec, n: int, rng: NoiseSource) -> np.ndarray:
    """``n`` i.i.d. draws; inverse CDF where it has a closed form."""
    if n < 2:
        raise InvalidParameterError(f"n must be at least 2, got {n}")
    p = spec.p
    f = spec.family
    gen = rng.generator
    if f == "uniform":
        return p["low"] + (p["high"] - p["low"]) * rng.open_uniform(n)
    if f == "cauchy":
        return p["loc"] + p["scale"] * np.tan(math.pi * (rng.open_uniform(n) - 0.5))
    if f == "pareto":
        return p["scale"] * rng.open_uniform(n) ** (-1.0 / p["shape"])
    if f == "gaussian":
        return p["mu"] + p["sigma"] * gen.standard_normal(n)
    if f == "lognormal":
        return np.exp(p["mu"] + p["sigma"] * gen.standard_normal(n))
    return p["loc"] + p["scale"] * gen.standard_t(p["df"], n)


def regularity_profile(spec: DistributionSpec, r: float, R: float | None = None) -> RegularityProfile:
    """Density floor ``L`` on ``[m - r, m + r]``; all families are unimodal, so
    the minimum sits at an endpoint. ``R`` defaults to ``|m|``."""
    if not (r > 0):
        raise InvalidParameterError(f"r must be positive, got {r}")
    m = spec.median
    L = min(spec.pdf(m - r), spec.pdf(m + r))
    if not (L > 0):
        raise InvalidParameterError(f"{spec.family} density vanishes on [m - r, m + r] for r={r}")
    return RegularityProfile(m=m, L=L, r=r, R=abs(m) if R is None else R)
