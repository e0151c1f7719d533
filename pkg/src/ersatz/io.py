"""CSV/JSON formats for trajectories and tabulated results."""

import csv
import json
import math
from pathlib import Path

import numpy as np

from .errors import ErsatzError
from .synthesis import NoiseSpec, Trajectory

TRAJECTORY_SCHEMA = "ersatz.trajectory/1"
SWEEP_SCHEMA = "ersatz.sweep/1"


class FileFormatError(ErsatzError, ValueError):
    """An input file is missing columns, has bad numbers, or a bad sidecar."""


def sidecar_path(path):
    return Path(path).with_suffix(".json")


def save_trajectory(traj, path):
    """Write ``index,value`` rows and a JSON sidecar holding role and spec."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "value"])
        for i, v in enumerate(traj.samples):
            w.writerow([i, repr(float(v))])
    meta = {
        "schema": TRAJECTORY_SCHEMA,
        "role": traj.role,
        "length": len(traj),
        "spec": traj.spec.to_dict() if traj.spec is not None else None,
    }
    sidecar_path(path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return path


def load_trajectory(path):
    """Read a trajectory written by :func:`save_trajectory`.

    A missing sidecar is tolerated: the series is then taken as a motion
    without spec.
    """
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or [h.strip() for h in header[:2]] != ["index", "value"]:
                raise FileFormatError(f"{path}: expected header 'index,value'")
            values = [float(row[1]) for row in reader if row]
    except (IndexError, ValueError) as exc:
        if isinstance(exc, FileFormatError):
            raise
        raise FileFormatError(f"{path}: malformed row ({exc})") from exc
    if not values:
        raise FileFormatError(f"{path}: no samples")
    arr = np.array(values)
    if not np.all(np.isfinite(arr)):
        raise FileFormatError(f"{path}: non-finite sample")

    role, spec = "motion", None
    side = sidecar_path(path)
    if side.exists():
        try:
            meta = json.loads(side.read_text())
            role = meta.get("role", "motion")
            if meta.get("spec"):
                spec = NoiseSpec.from_dict(meta["spec"])
        except (json.JSONDecodeError, TypeError, ValueError) as exc:
            raise FileFormatError(f"{side}: bad sidecar ({exc})") from exc
    return Trajectory(arr, role, spec)


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return "nan" if math.isnan(v) else repr(v)
    if isinstance(v, np.integer):
        return str(int(v))
    if v is None:
        return ""
    return str(v)


def write_rows(path, rows, columns):
    """Write dict rows to CSV with a header naming every column."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(row.get(c)) for c in columns])
    return path


def read_rows(path):
    """Read a CSV written by :func:`write_rows`; numeric cells become floats."""
    out = []
    with Path(path).open(newline="") as fh:
        for row in csv.DictReader(fh):
            parsed = {}
            for key, val in row.items():
                try:
                    parsed[key] = float(val)
                except (TypeError, ValueError):
                    parsed[key] = val
            out.append(parsed)
    return out


def write_json(path, obj):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")
    return path


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")
