"""Trajectory and report serialisation (CSV / JSON)."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .hamiltonians import SystemSpec
from .integrate import Trajectory

FLOAT_FMT = "%.17g"


def trajectory_header(n: int) -> list[str]:
    cols = ["t"]
    for i in range(1, n + 1):
        cols += [f"x{i}", f"y{i}"]
    return cols + ["H", "I", "P", "Q"]


def trajectory_rows(t: Trajectory) -> np.ndarray:
    m = len(t)
    n = t.spec.n
    out = np.empty((m, 1 + 2 * n + 4))
    out[:, 0] = t.times
    out[:, 1 : 1 + 2 * n : 2] = t.states.real
    out[:, 2 : 2 + 2 * n : 2] = t.states.imag
    out[:, 1 + 2 * n :] = t.integrals
    return out


def _fmt(x: float) -> str:
    return FLOAT_FMT % x


def export_trajectory(t: Trajectory, path, format: str = "csv") -> None:
    """Write a trajectory; ``path`` may be a filename or an open text stream."""
    if format not in ("csv", "json"):
        raise ValueError(f"unknown format {format!r}")
    text = trajectory_csv(t) if format == "csv" else json.dumps(trajectory_record(t), indent=1) + "\n"
    if hasattr(path, "write"):
        path.write(text)
    else:
        Path(path).write_text(text)


def trajectory_csv(t: Trajectory) -> str:
    lines = [",".join(trajectory_header(t.spec.n))]
    for row in trajectory_rows(t):
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def trajectory_record(t: Trajectory) -> dict:
    rows = trajectory_rows(t)
    n = t.spec.n
    return {
        "family": t.spec.family.value,
        "n": n,
        "gamma": list(map(float, t.spec.gamma_array)),
        "t": rows[:, 0].tolist(),
        "states": rows[:, 1 : 1 + 2 * n].tolist(),
        **{k: rows[:, 1 + 2 * n + i].tolist() for i, k in enumerate("HIPQ")},
    }


def read_trajectory_csv(path, spec: SystemSpec) -> Trajectory:
    """Inverse of the CSV export."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != trajectory_header(spec.n):
            raise ValueError("header does not match the system size")
        data = np.array([[float(v) for v in row] for row in reader], dtype=float).reshape(-1, len(header))
    n = spec.n
    states = data[:, 1 : 1 + 2 * n : 2] + 1j * data[:, 2 : 2 + 2 * n : 2]
    return Trajectory(spec, data[:, 0], states, data[:, 1 + 2 * n :])


def empty_trajectory(spec: SystemSpec) -> Trajectory:
    return Trajectory(spec, np.zeros(0), np.zeros((0, spec.n), complex), np.zeros((0, 4)))


def jsonable(obj):
    """Recursively convert numpy scalars/arrays, complex numbers and enums."""
    if hasattr(obj, "to_record"):
        return jsonable(obj.to_record())
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if hasattr(obj, "value") and not isinstance(obj, (str, int)):
        return obj.value
    return obj
