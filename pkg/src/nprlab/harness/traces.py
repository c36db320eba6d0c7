"""Plot-ready CSV traces and their JSON summaries."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .experiment import RegretTrace

HEADER = ["run", "round", "policy", "arm_id", "reward", "instant_regret", "cum_regret", "select_ms", "update_ms"]


def fmt(x: float) -> str:
    return format(float(x), ".9g")


def summary_path(path) -> Path:
    return Path(path).with_suffix(".summary.json")


def summarize(traces: list[RegretTrace]) -> dict:
    finals = np.array([t.final_regret for t in traces])
    return {
        "num_runs": len(traces),
        "policies": sorted({t.policy for t in traces}),
        "mean_final_regret": float(finals.mean()) if finals.size else None,
        "std_final_regret": float(finals.std()) if finals.size else None,
        "mean_select_ms_per_round": float(np.mean([t.select_ms.mean() for t in traces if t.T])) if traces else None,
        "mean_update_ms_per_round": float(np.mean([t.update_ms.mean() for t in traces if t.T])) if traces else None,
        "runs": [t.summary() for t in traces],
    }


def write_trace(traces: list[RegretTrace], path, format: str = "csv", extra: dict | None = None) -> Path:
    """Write all rounds of all runs to ``path`` plus a ``.summary.json`` sidecar."""
    path = Path(path)
    if format == "csv":
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(HEADER)
            for tr in traces:
                for i in range(tr.T):
                    w.writerow([tr.run, i + 1, tr.policy, int(tr.arm_id[i]), fmt(tr.reward[i]),
                                fmt(tr.instant_regret[i]), fmt(tr.cum_regret[i]), fmt(tr.select_ms[i]),
                                fmt(tr.update_ms[i])])
    elif format == "json":
        rows = [dict(zip(HEADER, [tr.run, i + 1, tr.policy, int(tr.arm_id[i]), float(tr.reward[i]),
                                  float(tr.instant_regret[i]), float(tr.cum_regret[i]), float(tr.select_ms[i]),
                                  float(tr.update_ms[i])]))
                for tr in traces for i in range(tr.T)]
        path.write_text(json.dumps(rows), encoding="utf-8")
    else:
        raise ValueError(f"unknown trace format {format!r}")
    summary = summarize(traces)
    if extra:
        summary.update(extra)
    summary_path(path).write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def read_trace(path) -> list[RegretTrace]:
    """Parse a CSV written by :func:`write_trace` back into traces."""
    by_run: dict[int, dict] = {}
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != HEADER:
            raise ValueError(f"unexpected trace header {header}")
        for row in reader:
            run = int(row[0])
            rec = by_run.setdefault(run, {"policy": row[2], "cols": [[] for _ in range(6)]})
            rec["cols"][0].append(int(row[3]))
            for j, v in enumerate(row[4:], start=1):
                rec["cols"][j].append(float(v))
    out = []
    for run, rec in by_run.items():
        c = rec["cols"]
        out.append(RegretTrace(run, rec["policy"], np.array(c[0], dtype=np.int64), *(np.array(x) for x in c[1:])))
    return out
