"""Run artifacts: metrics document, flat plotting file, per-request records.

All numbers are written through ``repr``-style shortest round-trip decimal
formatting (the json module does this for floats), so identical runs
produce byte-identical files and determinism can be checked by hashing.
"""

from __future__ import annotations

import json
import os
from typing import Any, Dict, List, Optional

from .engine import GroupMetrics, MetricsReport, RunResult

FLAT_COLUMNS = [
    "group",
    "request_count",
    "completed_count",
    "rejected_count",
    "mean_ms",
    "p50_ms",
    "p90_ms",
    "p99_ms",
    "prompt_hit_ratio",
    "semantic_hit_ratio",
    "early_exit_fraction",
    "sla_violation_fraction",
    "upstream_bytes_total",
]

SWEEP_COLUMNS = ["point", "param", "value"] + FLAT_COLUMNS[1:]


def _cell(value: Any) -> str:
    if value is None:
        return "na"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _flat_row(name: str, group: GroupMetrics) -> List[str]:
    data = group.to_dict()
    return [name] + [_cell(data[col]) for col in FLAT_COLUMNS[1:]]


def write_metrics_json(report: MetricsReport, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, indent=2)
        fh.write("\n")


def write_metrics_flat(report: MetricsReport, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\t".join(FLAT_COLUMNS) + "\n")
        fh.write("\t".join(_flat_row("overall", report.overall)) + "\n")
        for name, group in report.per_class.items():
            fh.write("\t".join(_flat_row(name, group)) + "\n")


def write_records(records: List[Dict[str, Any]], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record) + "\n")


def write_run_artifacts(result: RunResult, out_dir: str) -> List[str]:
    """Write metrics.json, metrics_flat.tsv and requests.jsonl; returns paths."""
    os.makedirs(out_dir, exist_ok=True)
    metrics_path = os.path.join(out_dir, "metrics.json")
    flat_path = os.path.join(out_dir, "metrics_flat.tsv")
    records_path = os.path.join(out_dir, "requests.jsonl")
    write_metrics_json(result.report, metrics_path)
    write_metrics_flat(result.report, flat_path)
    write_records(result.records, records_path)
    return [metrics_path, flat_path, records_path]


def _fmt(value: Optional[float], width: int = 10) -> str:
    if value is None:
        return "-".rjust(width)
    return f"{value:.2f}".rjust(width)


def summary_table(report: MetricsReport) -> str:
    """Human-readable per-class summary."""
    lines = []
    lines.append(f"architecture: {report.architecture}   seed: {report.seed}")
    header = (
        f"{'class':<18}{'count':>8}{'mean_ms':>10}{'p50_ms':>10}{'p90_ms':>10}{'p99_ms':>10}"
        f"{'prompt_hit':>12}{'sem_hit':>10}{'sla_viol%':>11}"
    )
    lines.append(header)
    lines.append("-" * len(header))
    rows = [("overall", report.overall)] + list(report.per_class.items())
    for name, group in rows:
        lines.append(
            f"{name:<18}{group.request_count:>8}{_fmt(group.mean_ms)}{_fmt(group.p50_ms)}"
            f"{_fmt(group.p90_ms)}{_fmt(group.p99_ms)}"
            f"{group.prompt_hit_ratio:>12.3f}{group.semantic_hit_ratio:>10.3f}"
            f"{100.0 * group.sla_violation_fraction:>10.2f}%"
        )
    if report.per_tier_compute_ms:
        busy = ", ".join(f"{tier}={ms:.1f}ms" for tier, ms in report.per_tier_compute_ms.items())
        lines.append(f"per-tier compute: {busy}")
    lines.append(f"sync copies: {report.sync_copies}")
    return "\n".join(lines)


def write_sweep_artifacts(
    rows: List[Dict[str, Any]], out_dir: str
) -> List[str]:
    """Write the wide sweep table (tsv) and its JSON form; returns paths."""
    os.makedirs(out_dir, exist_ok=True)
    tsv_path = os.path.join(out_dir, "sweep.tsv")
    json_path = os.path.join(out_dir, "sweep.json")
    with open(tsv_path, "w", encoding="utf-8") as fh:
        fh.write("\t".join(SWEEP_COLUMNS) + "\n")
        for row in rows:
            fh.write("\t".join(_cell(row[col]) for col in SWEEP_COLUMNS) + "\n")
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(rows, fh, indent=2)
        fh.write("\n")
    return [tsv_path, json_path]


def sweep_row(point: int, param: str, value: Any, report: MetricsReport) -> Dict[str, Any]:
    data = report.overall.to_dict()
    row: Dict[str, Any] = {"point": point, "param": param, "value": value}
    for col in FLAT_COLUMNS[1:]:
        row[col] = data[col]
    return row
