"""File formats: field JSON, trajectory/observable CSV, atomic writes."""

import hashlib
import json
import os
import tempfile

import numpy as np

from .errors import InvalidInputError

OBSERVABLE_COLUMNS = (
    "point_id", "t", "compat_resid", "tang_resid", "e_density", "I1",
    "p_num", "p_pred", "trX_num", "trX_pred", "xw_dev",
)


def fmt(x):
    """Round-trip float rendering (17 significant digits)."""
    return format(float(x), ".17g")


def write_atomic(path, text):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dump_json(obj):
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def dump_records(records):
    """JSON array with one record per line; keeps matrices readable in diffs."""
    return "[\n" + ",\n".join("  " + json.dumps(r) for r in records) + "\n]\n"


def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def field_records(point_ids, pairs, frames, weights):
    return [
        {
            "point_id": int(pid),
            "g": p.g.tolist(),
            "omega": p.omega.tolist(),
            "frame": np.asarray(f).tolist(),
            "weight": float(w),
        }
        for pid, p, f, w in zip(point_ids, pairs, frames, weights)
    ]


def read_field(path):
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, list) or not data:
        raise InvalidInputError(f"{path}: expected a non-empty array of points")
    for rec in data:
        missing = {"point_id", "g", "omega", "weight"} - set(rec)
        if missing:
            raise InvalidInputError(f"{path}: point record missing {sorted(missing)}")
    return data


def matrix_columns(n):
    cols = [f"g_{i}_{j}" for i in range(n) for j in range(n)]
    cols += [f"omega_{i}_{j}" for i in range(n) for j in range(n)]
    return cols


def trajectory_csv(point_ids, trajectories):
    n = trajectories[0].g.shape[-1]
    lines = [",".join(["point_id", "t"] + matrix_columns(n))]
    for pid, tr in zip(point_ids, trajectories):
        for k, t in enumerate(tr.times):
            vals = np.concatenate([tr.g[k].ravel(), tr.omega[k].ravel()])
            lines.append(",".join([str(pid), fmt(t)] + [fmt(v) for v in vals]))
    return "\n".join(lines) + "\n"


def observables_csv(point_ids, trajectories):
    lines = [",".join(OBSERVABLE_COLUMNS)]
    for pid, tr in zip(point_ids, trajectories):
        m = tr.monitors
        for k, t in enumerate(tr.times):
            row = [str(pid), fmt(t)] + [fmt(m[c][k]) for c in OBSERVABLE_COLUMNS[2:]]
            lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def _read_csv(path):
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    if not rows:
        raise InvalidInputError(f"{path}: no data rows")
    ids = [int(r[0]) for r in rows]
    vals = np.array([[float(x) for x in r[1:]] for r in rows])
    return header, ids, vals


def _group(ids, vals):
    out = {}
    for pid in dict.fromkeys(ids):
        mask = np.array([i == pid for i in ids])
        out[pid] = vals[mask]
    return out


def read_trajectory_csv(path):
    """Return ``{point_id: (times, g, omega)}``."""
    header, ids, vals = _read_csv(path)
    m = len(header) - 2
    n = int(round(np.sqrt(m / 2)))
    if header[:2] != ["point_id", "t"] or header[2:] != matrix_columns(n):
        raise InvalidInputError(f"{path}: unexpected trajectory header")
    out = {}
    for pid, block in _group(ids, vals).items():
        t = block[:, 0]
        g = block[:, 1:1 + n * n].reshape(-1, n, n)
        om = block[:, 1 + n * n:].reshape(-1, n, n)
        out[pid] = (t, g, om)
    return out


def read_observables_csv(path):
    """Return ``{point_id: {column: array}}``."""
    header, ids, vals = _read_csv(path)
    if tuple(header) != OBSERVABLE_COLUMNS:
        raise InvalidInputError(f"{path}: unexpected observables header")
    return {
        pid: {c: block[:, i] for i, c in enumerate(OBSERVABLE_COLUMNS[1:])}
        for pid, block in _group(ids, vals).items()
    }
