"""CSV and JSON serialisation of deviation reports."""

from __future__ import annotations

import csv
import io
import json
from importlib import resources
from pathlib import Path

from dploc.harness.experiments import DeviationReport
from dploc.median_dp import NO_REPLY

__all__ = ["CSV_COLUMNS", "ReportIOError", "emit_report", "report_rows", "report_to_json", "load_schema"]

CSV_COLUMNS = ("trial_index", "seed", "method", "n", "epsilon", "delta", "alpha",
               "estimate_or_NOREPLY", "abs_error", "bound_value", "within_bound")


class ReportIOError(OSError):
    """Writing a report failed; the message names the path."""


def report_rows(report: DeviationReport) -> list[dict]:
    cfg = report.config
    return [
        {
            "trial_index": row.trial_index,
            "seed": row.seed,
            "method": cfg.method,
            "n": cfg.n,
            "epsilon": cfg.epsilon,
            "delta": cfg.delta,
            "alpha": cfg.alpha,
            "estimate_or_NOREPLY": "NOREPLY" if row.estimate is NO_REPLY else row.estimate,
            "abs_error": row.abs_error,
            "bound_value": report.bound_value,
            "within_bound": row.within_bound,
        }
        for row in report.rows
    ]


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def report_to_csv(report: DeviationReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in report_rows(report):
        writer.writerow([_csv_cell(row[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def report_to_json(report: DeviationReport) -> dict:
    return {"summary": report.summary(), "config": report.config.to_dict(), "trials": report_rows(report)}


def load_schema() -> dict:
    return json.loads(resources.files("dploc.harness").joinpath("report.schema.json").read_text())


def emit_report(report: DeviationReport, format: str, path) -> None:
    if format == "csv":
        text = report_to_csv(report)
    elif format == "json":
        text = json.dumps(report_to_json(report), indent=2)
    else:
        raise ValueError(f"format must be 'csv' or 'json', got {format!r}")
    path = Path(path)
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise ReportIOError(f"cannot write report to {path}: {exc.strerror or exc}") from exc
