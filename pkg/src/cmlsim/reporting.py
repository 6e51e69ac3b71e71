"""JSON / CSV writers for simulation results."""
from __future__ import annotations

import csv
import json
from pathlib import Path

from .contract import DAY
from .sim import SimulationReport

SWEEP_HEADER = ["value", "accuracy_pct", "accuracy_all_pct", "gap_pct", "drain_days"]


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    return f"{value:.6f}"


def report_json(report: SimulationReport, config=None) -> str:
    doc = report.to_dict()
    if config is not None:
        doc["config"] = config
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def write_report(report: SimulationReport, path, config=None) -> None:
    Path(path).write_text(report_json(report, config), encoding="utf-8")


def timeline_header(report: SimulationReport) -> list:
    return (
        ["t_seconds", "t_days", "accuracy_pct"]
        + [f"balance_{a}" for a in report.agent_ids]
        + ["pool", "burned"]
    )


def write_timeline(report: SimulationReport, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(timeline_header(report))
        for s in report.snapshots:
            w.writerow(
                [fmt(s.t), fmt(s.t / DAY), fmt(s.accuracy)]
                + [fmt(s.balances[a]) for a in report.agent_ids]
                + [fmt(s.pool), fmt(s.burned)]
            )


def primary_drain_days(report: SimulationReport):
    """Drain time of the first malicious agent, or None."""
    for agent, days in report.drain_time_days.items():
        return days
    return None


def sweep_row(value, report: SimulationReport) -> list:
    return [
        fmt(value),
        fmt(report.final_accuracy),
        fmt(report.accuracy_all),
        fmt(report.gap),
        fmt(primary_drain_days(report)),
    ]


def write_sweep(rows, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_HEADER)
        w.writerows(rows)


def summary_line(report: SimulationReport) -> str:
    drains = ",".join(f"{a}:{fmt(d) or 'never'}" for a, d in report.drain_time_days.items()) or "none"
    return (
        f"accuracy={fmt(report.final_accuracy)} "
        f"gap={fmt(report.gap)} "
        f"drain_days={drains}"
    )
