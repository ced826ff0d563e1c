"""CSV emission.  Floats are written with 17 significant digits so every
64-bit value reads back bit-exactly."""
from __future__ import annotations

import csv
import os

import numpy as np

from .simulate import CycleMetrics, Trajectory

SCAN_HEADER = ["E", "re_lead", "im_lead", "stable", "note"]
TRAJECTORY_HEADER = ["t", "x1", "x2", "x3"]
METRICS_HEADER = ["E", "amp_x1", "amp_x2", "amp_x3", "period", "decaying", "period_rel_err_bound"]


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def _comments(fh, lines):
    for line in lines or ():
        fh.write(f"# {line}\n")


def write_analysis(path, rows: list[tuple[str, object]], comments=None) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        _comments(fh, comments)
        w = _writer(fh)
        w.writerow(["name", "value"])
        for name, value in rows:
            w.writerow([name, fmt(value)])


def write_scan(path, rows, comments=None) -> None:
    """``rows`` are ``(E, re, im, stable, note)``; failed points carry ``None`` values."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        _comments(fh, comments)
        w = _writer(fh)
        w.writerow(SCAN_HEADER)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def write_trajectory(path, traj: Trajectory, comments=None, stride: int = 1) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        _comments(fh, comments)
        w = _writer(fh)
        w.writerow(TRAJECTORY_HEADER)
        idx = np.arange(0, len(traj.times), stride)
        for i in idx:
            t = traj.times[i]
            x1, x2, x3 = traj.states[i]
            w.writerow([fmt(t), fmt(x1), fmt(x2), fmt(x3)])


def write_metrics(path, E: float, m: CycleMetrics, append: bool = True) -> None:
    new = not (append and os.path.exists(path))
    with open(path, "w" if new else "a", newline="", encoding="utf-8") as fh:
        w = _writer(fh)
        if new:
            w.writerow(METRICS_HEADER)
        w.writerow(
            [fmt(E), *(fmt(float(v)) for v in m.amplitude), fmt(m.period), fmt(m.decaying), fmt(m.period_rel_err_bound)]
        )


def read_table(path) -> tuple[list[str], list[list[str]]]:
    """Header and rows of a CSV written here, skipping ``#`` comment lines."""
    with open(path, newline="", encoding="utf-8") as fh:
        lines = [line for line in fh if not line.startswith("#")]
    rows = list(csv.reader(lines))
    return rows[0], rows[1:]


def read_trajectory(path) -> Trajectory:
    _, rows = read_table(path)
    arr = np.array([[float(v) for v in r] for r in rows])
    return Trajectory(arr[:, 0], arr[:, 1:])
