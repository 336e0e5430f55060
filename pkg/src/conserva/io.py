"""System files (JSON) and trajectory files (CSV)."""

import csv
import json
import math
from pathlib import Path

import numpy as np

from .exceptions import InputError
from .systems import LotkaVolterraSystem, ReplicatorSystem

KINDS = ("replicator", "lotka_volterra")


class SchemaError(InputError):
    """A system file does not match the expected layout."""


def _matrix(value, path, square=True):
    if not isinstance(value, list) or not value or not all(isinstance(r, list) for r in value):
        raise SchemaError(f"{path}: expected a nonempty array of arrays")
    width = len(value[0])
    for i, row in enumerate(value):
        if len(row) != width:
            raise SchemaError(f"{path}[{i}]: ragged row (length {len(row)}, expected {width})")
        for j, v in enumerate(row):
            _number(v, f"{path}[{i}][{j}]")
    if square and width != len(value):
        raise SchemaError(f"{path}: expected a square matrix, got {len(value)}x{width}")
    return np.array(value, dtype=float)


def _number(v, path):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise SchemaError(f"{path}: expected a finite number, got {v!r}")
    return float(v)


def _vector(value, path, size=None):
    if not isinstance(value, list):
        raise SchemaError(f"{path}: expected an array")
    out = np.array([_number(v, f"{path}[{i}]") for i, v in enumerate(value)], dtype=float)
    if size is not None and out.size != size:
        raise SchemaError(f"{path}: expected length {size}, got {out.size}")
    return out


def parse_system(data):
    """Validate a decoded system document.

    Returns ``(system, equilibrium_hint_or_None)``.
    """
    if not isinstance(data, dict):
        raise SchemaError("$: expected an object")
    kind = data.get("kind")
    if kind not in KINDS:
        raise SchemaError(f"$.kind: expected one of {KINDS}, got {kind!r}")
    allowed = {"kind", "equilibrium", "labels", "payoff", "interaction", "r", "name"}
    extra = sorted(set(data) - allowed)
    if extra:
        raise SchemaError(f"$: unexpected field(s) {extra}")
    if kind == "replicator":
        if "interaction" in data or "r" in data:
            raise SchemaError("$: replicator files take 'payoff', not 'interaction'/'r'")
        if "payoff" not in data:
            raise SchemaError("$.payoff: required for kind 'replicator'")
        A = _matrix(data["payoff"], "$.payoff")
        size = A.shape[0]
    else:
        if "payoff" in data:
            raise SchemaError("$: lotka_volterra files take 'interaction' and 'r', not 'payoff'")
        for key in ("interaction", "r"):
            if key not in data:
                raise SchemaError(f"$.{key}: required for kind 'lotka_volterra'")
        Ap = _matrix(data["interaction"], "$.interaction")
        r = _vector(data["r"], "$.r", Ap.shape[0])
        size = Ap.shape[0]
    labels = data.get("labels")
    if labels is not None:
        if not isinstance(labels, list) or not all(isinstance(s, str) for s in labels) \
                or len(labels) != size:
            raise SchemaError(f"$.labels: expected {size} strings")
        labels = tuple(labels)
    hint = None
    if data.get("equilibrium") is not None:
        hint = _vector(data["equilibrium"], "$.equilibrium", size)
    if kind == "replicator":
        return ReplicatorSystem(A, labels), hint
    return LotkaVolterraSystem(Ap, r, labels), hint


def load_system(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    try:
        return parse_system(data)
    except SchemaError as exc:
        raise SchemaError(f"{path}: {exc}") from None


def system_to_dict(system, equilibrium=None):
    if isinstance(system, ReplicatorSystem):
        out = {"kind": "replicator", "payoff": system.payoff.tolist()}
    elif isinstance(system, LotkaVolterraSystem):
        out = {"kind": "lotka_volterra", "interaction": system.interaction.tolist(),
               "r": system.growth.tolist()}
    else:
        raise InputError(f"not a system: {system!r}")
    if equilibrium is not None:
        out["equilibrium"] = [float(v) for v in equilibrium]
    if system.labels is not None:
        out["labels"] = list(system.labels)
    return out


def load_certificate(path):
    """Read ``{"D": [[...]]}`` or a bare matrix."""
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if isinstance(data, dict):
        if "D" not in data:
            raise SchemaError(f"{path}: $.D: required")
        return _matrix(data["D"], f"{path}: $.D")
    return _matrix(data, f"{path}: $")


def dumps(obj):
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


# --- CSV ---------------------------------------------------------------------

def fmt(v):
    return f"{float(v):.17g}"


def trajectory_columns(traj, with_h=True):
    """Column names and arrays in file order:
    ``t, <state columns>, H (optional), sum_diag (replicator only)``."""
    prefix = {"x": "x", "y": "y", "u": "u"}[traj.chart]
    names = ["t"] + [f"{prefix}{i + 1}" for i in range(traj.states.shape[1])]
    cols = [traj.times] + list(traj.states.T)
    if with_h and "H" in traj.observables:
        names.append("H")
        cols.append(traj.observables["H"])
    if "sum_diag" in traj.observables:
        names.append("sum_diag")
        cols.append(traj.observables["sum_diag"])
    return names, cols


def write_trajectory_csv(traj, path, with_h=True):
    names, cols = trajectory_columns(traj, with_h)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in zip(*cols):
            w.writerow([fmt(v) for v in row])
        if traj.status != "completed":
            fh.write(f"# status={traj.status}: {traj.message}\n")


def read_trajectory_csv(path):
    """Return ``(columns: dict[name, ndarray], status)``."""
    status = "completed"
    rows = []
    with open(path, newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                status = line[1:].strip().split(":", 1)[0].removeprefix("status=")
                continue
            rows.append(line)
    reader = list(csv.reader(rows))
    header, body = reader[0], reader[1:]
    data = np.array([[float(v) for v in r] for r in body]).reshape(len(body), len(header))
    return {name: data[:, k] for k, name in enumerate(header)}, status


def write_plot_data(traj, prefix):
    """(t, H) file plus one file per consecutive pair of state coordinates."""
    written = []
    names, _ = trajectory_columns(traj)
    if "H" in traj.observables:
        p = f"{prefix}_H.csv"
        with open(p, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "H"])
            for t, h in zip(traj.times, traj.observables["H"]):
                w.writerow([fmt(t), fmt(h)])
        written.append(p)
    k = traj.states.shape[1]
    for i in range(k - 1):
        a, b = names[1 + i], names[2 + i]
        p = f"{prefix}_phase_{a}_{b}.csv"
        with open(p, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([a, b])
            for row in traj.states[:, i:i + 2]:
                w.writerow([fmt(v) for v in row])
        written.append(p)
    return written
