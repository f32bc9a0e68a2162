"""``dploc`` command line.

Exit codes: 0 success, 2 precondition or configuration error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from dploc.core_numeric import InvalidParameterError, NoiseSource
from dploc.harness.commands import evaluate_bounds_config, read_data_file, run_audit_config
from dploc.harness.experiments import (
    ConfigError,
    ExperimentConfig,
    run_deviation_experiment,
    run_negative_result_experiment,
)
from dploc.harness.report import ReportIOError, emit_report
from dploc.median_dp import NO_REPLY, PrivacyBudget, calibrate_eta, ptr_median, smooth_dp_median

log = logging.getLogger("dploc")

EXIT_OK, EXIT_CONFIG, EXIT_IO = 0, 2, 3


def _load_json(path: str) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ReportIOError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(d, dict):
        raise ConfigError(f"{path}: top-level JSON value must be an object")
    return d


def _write_json(obj, out: str | None) -> None:
    text = json.dumps(obj, indent=2)
    if out is None:
        print(text)
        return
    try:
        Path(out).write_text(text + "\n", encoding="utf-8")
    except OSError as exc:
        raise ReportIOError(f"cannot write {out}: {exc.strerror or exc}") from exc


def cmd_estimate(args) -> int:
    x = read_data_file(args.input)
    rng = NoiseSource(args.seed)
    out = {"method": args.method, "n": int(x.shape[0]), "seed": args.seed}
    if args.method == "smooth":
        if args.T is None:
            raise ConfigError("--T is required for --method smooth")
        budget = PrivacyBudget(args.epsilon, args.delta)
        value = smooth_dp_median(x, args.T, budget, rng)
        out.update(epsilon_total=budget.epsilon, delta=budget.delta, T=args.T)
    else:
        if args.total_epsilon:
            budget = PrivacyBudget.ptr_from_total(args.epsilon, args.delta)
        else:
            budget = PrivacyBudget(args.epsilon, args.delta)
        if args.eta is not None:
            eta = args.eta
        elif None not in (args.alpha, args.L, args.r):
            eta = calibrate_eta(int(x.shape[0]), budget, args.alpha, args.L, args.r).eta
        else:
            raise ConfigError("--method ptr needs --eta, or all of --alpha, --L and --r")
        value = ptr_median(x, eta, budget, rng)
        out.update(epsilon_total=2 * budget.epsilon, delta=budget.delta, eta=eta)
    out["estimate"] = "NOREPLY" if value is NO_REPLY else value
    print(json.dumps(out))
    return EXIT_OK


def cmd_mc(args) -> int:
    d = _load_json(args.config)
    if args.workers is not None:
        d["workers"] = args.workers
    cfg = ExperimentConfig.from_dict(d)
    report = run_deviation_experiment(cfg)
    fmt = args.format or ("json" if str(args.out).endswith(".json") else "csv")
    emit_report(report, fmt, args.out)
    s = report.summary()
    log.info("coverage %.4f, no-reply rate %.4f, bound %.6g", s["coverage"], s["no_reply_rate"], s["bound_value"])
    return EXIT_OK


def cmd_audit(args) -> int:
    reports = run_audit_config(_load_json(args.config))
    _write_json({"reports": reports, "all_passed": all(r["passed"] for r in reports)}, args.out)
    return EXIT_OK


def cmd_bounds(args) -> int:
    _write_json(evaluate_bounds_config(_load_json(args.config)), None)
    return EXIT_OK


def cmd_negative(args) -> int:
    d = _load_json(args.config)
    d.setdefault("method", "dp_mom")
    cfg = ExperimentConfig.from_dict(d)
    report = run_negative_result_experiment(cfg, repetitions=args.repetitions)
    _write_json(report.summary(), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dploc", description="Differentially private location estimators.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("estimate", help="release a private median of a data file")
    e.add_argument("--method", choices=["smooth", "ptr"], required=True)
    e.add_argument("--input", required=True)
    e.add_argument("--epsilon", type=float, required=True)
    e.add_argument("--delta", type=float, required=True)
    e.add_argument("--eta", type=float)
    e.add_argument("--alpha", type=float)
    e.add_argument("--L", type=float)
    e.add_argument("--r", type=float)
    e.add_argument("--T", type=float)
    e.add_argument("--total-epsilon", action="store_true",
                   help="treat --epsilon as the end-to-end budget (ptr spends 2x its step epsilon)")
    e.add_argument("--seed", type=int, required=True)
    e.set_defaults(func=cmd_estimate)

    m = sub.add_parser("mc", help="Monte-Carlo deviation experiment")
    m.add_argument("--config", required=True)
    m.add_argument("--out", required=True)
    m.add_argument("--format", choices=["csv", "json"])
    m.add_argument("--workers", type=int)
    m.set_defaults(func=cmd_mc)

    a = sub.add_parser("audit", help="empirical privacy audit")
    a.add_argument("--config", required=True)
    a.add_argument("--out")
    a.set_defaults(func=cmd_audit)

    b = sub.add_parser("bounds", help="print a deviation bound's term decomposition")
    b.add_argument("--config", required=True)
    b.set_defaults(func=cmd_bounds)

    n = sub.add_parser("negative", help="median-of-means vs DP median-of-means comparison")
    n.add_argument("--config", required=True)
    n.add_argument("--out")
    n.add_argument("--repetitions", type=int, default=20)
    n.set_defaults(func=cmd_negative)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except OSError as exc:
        print(f"dploc: {exc}", file=sys.stderr)
        return EXIT_IO
    except (InvalidParameterError, KeyError, TypeError) as exc:
        print(f"dploc: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
