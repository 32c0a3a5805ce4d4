"""CSV/JSON serialization of ensemble results."""
from __future__ import annotations

import csv
import json
import os
from typing import Optional

from .ensemble import EnsembleResult

HISTOGRAM_FILE = "histogram.csv"
RUNS_FILE = "runs.csv"
SUMMARY_FILE = "summary.json"
FORMATS = ("csv", "json", "both")


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def summary_dict(result: EnsembleResult, wall_time: Optional[float] = None) -> dict:
    return {
        "config": result.config.to_dict(),
        "mean_c": result.mean_c,
        "std_c": result.std_c,
        "violation_probability": result.violation_probability,
        "mean_s": result.mean_s,
        "wall_time": wall_time,
    }


def _open(path):
    try:
        return open(path, "w", newline="", encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def write_histogram_csv(result: EnsembleResult, path) -> None:
    h = result.histogram
    with _open(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["bin_left", "bin_right", "density"])
        for left, right, d in zip(h.edges[:-1], h.edges[1:], h.density):
            writer.writerow([fmt(left), fmt(right), fmt(d)])


def write_runs_csv(result: EnsembleResult, path) -> None:
    with _open(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["run_index", "c_ab", "c_abp", "c_apb", "c_apbp", "s",
             "violated_reduced", "violated_chsh"]
        )
        for index, rec in enumerate(result.records):
            writer.writerow(
                [index, *(fmt(c) for c in rec.correlators), fmt(rec.s_value),
                 int(rec.violated_reduced), int(rec.violated_chsh)]
            )


def write_summary_json(result: EnsembleResult, path, wall_time=None) -> None:
    with _open(path) as fh:
        json.dump(summary_dict(result, wall_time), fh, indent=2, sort_keys=True)
        fh.write("\n")


def emit(result: EnsembleResult, out_dir, fmt_: str = "both", wall_time=None) -> list:
    """Write the requested files into ``out_dir`` and return their paths."""
    if fmt_ not in FORMATS:
        raise ValueError(f"format must be one of {FORMATS}")
    os.makedirs(out_dir, exist_ok=True)
    written = []
    if fmt_ in ("csv", "both"):
        for name, writer in ((HISTOGRAM_FILE, write_histogram_csv), (RUNS_FILE, write_runs_csv)):
            path = os.path.join(out_dir, name)
            writer(result, path)
            written.append(path)
    if fmt_ in ("json", "both"):
        path = os.path.join(out_dir, SUMMARY_FILE)
        write_summary_json(result, path, wall_time)
        written.append(path)
    return written
