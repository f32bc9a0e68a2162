"""Config-driven entry points shared by the CLI: audits, bound tables, data files."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from dploc import bounds
from dploc.core_numeric import InvalidParameterError, NoiseSource, as_sample
from dploc.harness.distributions import DistributionSpec, generate_sample
from dploc.harness.experiments import ConfigError
from dploc.median_dp import PrivacyBudget
from dploc.privacy_audit import (
    STRATEGIES,
    audit_mechanism,
    make_neighbor_pairs,
    ptr_mechanism,
    pure_noise_mechanism,
    release_minimum_mechanism,
    smooth_median_mechanism,
)

__all__ = ["DataFileError", "read_data_file", "run_audit_config", "evaluate_bounds_config"]


class DataFileError(OSError):
    """The input data file could not be read."""


def read_data_file(path) -> np.ndarray:
    """One decimal real per line; text after ``#`` and blank lines are ignored."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataFileError(f"cannot read {path}: {exc.strerror or exc}") from exc
    values = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            values.append(float(line))
        except ValueError:
            raise InvalidParameterError(f"{path}:{lineno}: not a number: {line!r}") from None
    return as_sample(values)


def _check_keys(d: dict, allowed: set, required: set, what: str) -> None:
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(f"unknown {what} config keys: {sorted(unknown)}")
    missing = required - set(d)
    if missing:
        raise ConfigError(f"missing {what} config keys: {sorted(missing)}")


_AUDIT_KEYS = {"mechanism", "epsilon", "delta", "T", "eta", "a_hat_rule", "distribution", "n", "data",
               "strategies", "pairs_per_strategy", "bins", "trials", "seed"}


def run_audit_config(d: dict) -> list[dict]:
    """Audit one mechanism on neighbour pairs built from a base sample.

    ``ptr`` is audited at its full cost ``(2 eps, delta)``.
    """
    _check_keys(d, _AUDIT_KEYS, {"mechanism", "epsilon", "delta"}, "audit")
    budget = PrivacyBudget(d["epsilon"], d["delta"])
    kind = d["mechanism"]
    if kind == "smooth":
        if "T" not in d:
            raise ConfigError("smooth audit needs T")
        mech, declared = smooth_median_mechanism(d["T"], budget), budget
    elif kind == "ptr":
        if "eta" not in d:
            raise ConfigError("ptr audit needs eta")
        mech = ptr_mechanism(d["eta"], budget, d.get("a_hat_rule", "window"))
        declared = PrivacyBudget(2 * budget.epsilon, budget.delta)
    elif kind == "release_min":
        mech, declared = release_minimum_mechanism(), budget
    elif kind == "pure_noise":
        mech, declared = pure_noise_mechanism(), budget
    else:
        raise ConfigError(f"unknown mechanism {kind!r}")

    rng = NoiseSource(int(d.get("seed", 0)))
    data_rng, pair_rng, audit_rng = rng.spawn(3)
    if "data" in d:
        base = as_sample(d["data"])
    else:
        dist = d.get("distribution", {"family": "gaussian"})
        base = generate_sample(DistributionSpec(dist["family"], dict(dist.get("params", {}))),
                               int(d.get("n", 30)), data_rng)
    strategies = list(d.get("strategies", STRATEGIES))
    per = int(d.get("pairs_per_strategy", 1))
    pairs = make_neighbor_pairs(base, strategies, per * len(strategies), pair_rng)
    streams = audit_rng.spawn(len(pairs))
    reports = []
    for pair, stream in zip(pairs, streams):
        rep = audit_mechanism(mech, pair, declared, int(d.get("bins", 20)), int(d.get("trials", 100_000)), stream)
        reports.append({"mechanism": kind, **rep.as_dict()})
    return reports


_BOUND_KEYS = {"bound", "n", "alpha", "sigma", "L", "r", "R", "m", "T", "epsilon", "delta"}


def evaluate_bounds_config(d: dict) -> dict:
    _check_keys(d, _BOUND_KEYS, {"bound", "n", "alpha"}, "bounds")
    kind, n, alpha = d["bound"], int(d["n"]), float(d["alpha"])

    def need(*keys):
        missing = [k for k in keys if k not in d]
        if missing:
            raise ConfigError(f"bound {kind} needs {missing}")

    if kind == "subgaussian_mean":
        need("sigma")
        v = bounds.subgaussian_mean_bound(d["sigma"], n, alpha)
        return {"bound": kind, "total": v, "terms": {"subgaussian": v}}
    if kind == "mom":
        need("sigma")
        v = bounds.mom_bound(d["sigma"], n, alpha)
        return {"bound": kind, "total": v, "terms": {"mom": v}}
    if kind == "empirical_median":
        need("L")
        v = bounds.empirical_median_bound(n, d["L"], alpha, d.get("r"))
        return {"bound": kind, "total": v, "terms": {"subgaussian": v}}
    need("L", "r", "epsilon", "delta")
    profile = bounds.RegularityProfile(m=d.get("m", 0.0), L=d["L"], r=d["r"], R=d.get("R", abs(d.get("m", 0.0))))
    budget = PrivacyBudget(d["epsilon"], d["delta"])
    if kind == "smooth_median":
        need("T")
        bv = bounds.smooth_median_bound(n, profile, d["T"], budget, alpha)
    elif kind == "ptr_median":
        bv = bounds.ptr_median_bound(n, profile, budget, alpha)
    else:
        raise ConfigError(f"unknown bound {kind!r}")
    return {"bound": kind, **bv.as_dict()}
