"""
Command line front end.

    hermflow generate  --config cfg.json --out run/
    hermflow integrate --config cfg.json --field run/field.json --out run/ --velocity random
    hermflow verify    --config cfg.json --out run/
    hermflow energy    --config cfg.json --field run/field.json --out run/

Exit codes: 0 success, 1 validation failure, 2 numerical drift.
"""

import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass, field, fields
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .config import TOL, Tolerances
from .errors import DriftError, HermflowError, InvalidInputError
from .fiber import make_pair, random_pair
from .field import FieldError, SampledField, global_energy, map_pointwise
from .geodesic import Trajectory, integrate, make_initial
from .io import (
    dump_json,
    dump_records,
    field_records,
    observables_csv,
    read_field,
    read_observables_csv,
    read_trajectory_csv,
    sha256_file,
    trajectory_csv,
    write_atomic,
)
from .tangent import TangentPair, project_tangent
from .matrix_kernel import skew, sym
from .variational import DiscreteCurve, energy_scale, first_variation_fd
from .verify import CHECKS, run_checks

EXIT_OK, EXIT_INVALID, EXIT_DRIFT = 0, 1, 2


@dataclass
class RunConfig:
    dim: int = 4
    num_points: int = 4
    seed: int = 0
    spread: float = 0.3
    t_end: float = 1.0
    dt: float = 1e-3
    retraction_every: int = None
    quadrature: str = "trapezoid"
    output_dir: str = "run"
    tolerances: dict = field(default_factory=dict)
    velocity_scale: float = 0.5
    probes: int = 3

    def __post_init__(self):
        if not isinstance(self.dim, int) or self.dim < 2 or self.dim % 2:
            raise InvalidInputError("dim must be even and >= 2")
        if not isinstance(self.num_points, int) or self.num_points < 1:
            raise InvalidInputError("num_points must be >= 1")
        if not self.dt > 0:
            raise InvalidInputError("dt must be positive")
        if not self.t_end > 0:
            raise InvalidInputError("t_end must be positive")
        if self.spread < 0:
            raise InvalidInputError("spread must be nonnegative")
        if self.retraction_every is not None and self.retraction_every < 1:
            raise InvalidInputError("retraction_every must be a positive integer")
        if self.quadrature not in ("trapezoid", "simpson"):
            raise InvalidInputError("quadrature must be 'trapezoid' or 'simpson'")
        known = {f.name for f in fields(Tolerances)} | set(CHECKS)
        unknown = set(self.tolerances) - known
        if unknown:
            raise InvalidInputError(f"unknown tolerance keys: {sorted(unknown)}")

    @classmethod
    def load(cls, path=None, **overrides):
        data = {}
        if path:
            with open(path) as fh:
                data = json.load(fh)
            unknown = set(data) - {f.name for f in fields(cls)}
            if unknown:
                raise InvalidInputError(f"unknown config keys: {sorted(unknown)}")
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**data)

    def tol(self):
        base = {f.name for f in fields(Tolerances)}
        return TOL.with_overrides(**{k: v for k, v in self.tolerances.items() if k in base})

    def check_overrides(self):
        return {k: v for k, v in self.tolerances.items() if k in CHECKS}


def _now():
    return datetime.now(timezone.utc).isoformat()


def _write_manifest(out, command, cfg, started, files, criteria):
    path = os.path.join(out, "manifest.json")
    manifest = {"artifact_version": __version__, "commands": {}}
    if os.path.exists(path):
        with open(path) as fh:
            manifest = json.load(fh)
    manifest["commands"][command] = {
        "config": asdict(cfg),
        "started": started,
        "finished": _now(),
        "criteria": criteria,
        "files": {os.path.basename(f): sha256_file(f) for f in files},
    }
    write_atomic(path, dump_json(manifest))


def _err(msg):
    print(f"hermflow: {msg}", file=sys.stderr)


def cmd_generate(cfg):
    started = _now()
    out = cfg.output_dir
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.num_points)
    pairs, frames = [], []
    for ss in seeds:
        p, f = random_pair(ss, cfg.dim, cfg.spread)
        pairs.append(p)
        frames.append(f)
    weights = [1.0 / cfg.num_points] * cfg.num_points
    path = os.path.join(out, "field.json")
    write_atomic(path, dump_records(field_records(range(cfg.num_points), pairs, frames, weights)))
    _write_manifest(out, "generate", cfg, started, [path], {"pairs_valid": True})
    return EXIT_OK


def _load_field(path, tol):
    recs = read_field(path)
    pairs = []
    for r in recs:
        try:
            pairs.append(make_pair(np.array(r["g"], float), np.array(r["omega"], float), tol=tol))
        except HermflowError as exc:
            raise InvalidInputError(f"{path}: point {r['point_id']}: {exc}") from exc
    return SampledField.build(pairs, [r["weight"] for r in recs], [int(r["point_id"]) for r in recs])


def _velocities(kind, fld, cfg):
    n = fld.items[0].n
    if kind == "zero":
        return [(np.zeros((n, n)), np.zeros((n, n))) for _ in fld.items]
    if kind == "conformal":
        return [(np.eye(n), np.eye(n)) for _ in fld.items]
    if kind == "random":
        out = []
        for pid, p in zip(fld.point_ids, fld.items):
            rng = np.random.default_rng([cfg.seed, 1, pid])
            h = sym(rng.standard_normal((n, n)))
            alpha = skew(rng.standard_normal((n, n)))
            t = project_tangent(TangentPair(np.linalg.solve(p.g, h), np.linalg.solve(p.omega, alpha), p))
            t = t * (cfg.velocity_scale / t.norm())
            out.append((t.h_cap, t.a_cap))
        return out
    with open(kind) as fh:
        recs = {int(r["point_id"]): r for r in json.load(fh)}
    missing = set(fld.point_ids) - set(recs)
    if missing:
        raise InvalidInputError(f"velocity file lacks points {sorted(missing)}")
    return [(np.array(recs[pid]["h_cap"], float), np.array(recs[pid]["a_cap"], float))
            for pid in fld.point_ids]


def cmd_integrate(cfg, field_path, velocity="random"):
    started = _now()
    tol = cfg.tol()
    fld = _load_field(field_path, tol)
    vels = _velocities(velocity, fld, cfg)
    inits = SampledField(
        fld.point_ids,
        tuple(make_initial(p, H, A, tol=tol) for p, (H, A) in zip(fld.items, vels)),
        fld.weights,
    )
    try:
        trajs = map_pointwise(
            inits, lambda init: integrate(init, cfg.t_end, cfg.dt, cfg.retraction_every, tol=tol)
        )
    except FieldError as exc:
        for pid, e in exc.errors.items():
            _err(f"point {pid}: {e}")
        drift = all(isinstance(e, DriftError) for e in exc.errors.values())
        return EXIT_DRIFT if drift else EXIT_INVALID

    flagged = 0
    for pid, tr in zip(trajs.point_ids, trajs.items):
        bad = np.flatnonzero(np.maximum(tr.monitors["compat_resid"], tr.monitors["tang_resid"]) > tol.drift)
        for k in bad:
            _err(f"drift: point {pid} t={tr.times[k]:.6g} beyond {tol.drift:g}")
        flagged += len(bad)

    out = cfg.output_dir
    tpath = os.path.join(out, "trajectory.csv")
    opath = os.path.join(out, "observables.csv")
    write_atomic(tpath, trajectory_csv(trajs.point_ids, trajs.items))
    write_atomic(opath, observables_csv(trajs.point_ids, trajs.items))
    _write_manifest(out, "integrate", cfg, started, [tpath, opath],
                    {"drift_within_tolerance": flagged == 0})
    return EXIT_DRIFT if flagged else EXIT_OK


def cmd_verify(cfg):
    started = _now()
    results = run_checks(dim=cfg.dim, seed=cfg.seed, overrides=cfg.check_overrides())
    ok = all(r["status"] == "pass" for r in results)
    for r in results:
        if r["status"] != "pass":
            _err(f"verify: {r['name']} {r['status']} (residual {r['residual']}, threshold {r['threshold']})")
    path = os.path.join(cfg.output_dir, "verify.json")
    write_atomic(path, dump_json({"all_pass": ok, "checks": results}))
    _write_manifest(cfg.output_dir, "verify", cfg, started, [path],
                    {r["name"]: r["status"] == "pass" for r in results})
    return EXIT_OK if ok else EXIT_INVALID


def cmd_energy(cfg, field_path, traj_path, obs_path):
    started = _now()
    recs = {int(r["point_id"]): r for r in read_field(field_path)}
    paths = read_trajectory_csv(traj_path)
    obs = read_observables_csv(obs_path)
    if set(paths) != set(obs) or not set(paths) <= set(recs):
        raise InvalidInputError("trajectory, observables and field files disagree on point ids")
    pids = list(paths)
    trajs = [Trajectory(obs[p]["t"], paths[p][1], paths[p][2], None, None, {"I1": obs[p]["I1"]})
             for p in pids]
    weights = [recs[p]["weight"] for p in pids]
    total = global_energy(trajs, weights, cfg.quadrature)

    points = []
    for pid, tr, w in zip(pids, trajs, weights):
        single = global_energy([tr], [1.0], cfg.quadrature)
        curve = DiscreteCurve(tr.times, tr.g, tr.omega, cfg.quadrature)
        scale = energy_scale(curve)
        probes = [first_variation_fd(curve, [cfg.seed, 2, pid, k]) for k in range(cfg.probes)]
        points.append({
            "point_id": pid,
            "weight": w,
            "energy": single,
            "energy_scale": scale,
            "probes": probes,
            "probes_normalized": [v / scale if scale > 0 else 0.0 for v in probes],
        })
    path = os.path.join(cfg.output_dir, "energy.json")
    write_atomic(path, dump_json({"global_energy": total, "quadrature": cfg.quadrature,
                                  "points": points}))
    _write_manifest(cfg.output_dir, "energy", cfg, started, [path], {"energy_written": True})
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(prog="hermflow", description=__doc__.split("\n\n")[0].strip())
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("generate", "integrate", "verify", "energy"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON run configuration")
        sp.add_argument("--out", help="output directory (overrides config output_dir)")
        sp.add_argument("--seed", type=int, help="overrides config seed")
        if name in ("integrate", "energy"):
            sp.add_argument("--field", help="field.json (default: <out>/field.json)")
        if name == "integrate":
            sp.add_argument("--velocity", default="random",
                            help="'random', 'zero', 'conformal' or a JSON file of per-point h_cap/a_cap")
        if name == "energy":
            sp.add_argument("--trajectory", help="trajectory.csv (default: <out>/trajectory.csv)")
            sp.add_argument("--observables", help="observables.csv (default: <out>/observables.csv)")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig.load(args.config, seed=args.seed, output_dir=args.out)
        out = cfg.output_dir
        if args.command == "generate":
            return cmd_generate(cfg)
        if args.command == "verify":
            return cmd_verify(cfg)
        field_path = args.field or os.path.join(out, "field.json")
        if args.command == "integrate":
            return cmd_integrate(cfg, field_path, args.velocity)
        return cmd_energy(
            cfg,
            field_path,
            args.trajectory or os.path.join(out, "trajectory.csv"),
            args.observables or os.path.join(out, "observables.csv"),
        )
    except DriftError as exc:
        _err(str(exc))
        return EXIT_DRIFT
    except (HermflowError, OSError, ValueError, KeyError, TypeError) as exc:
        _err(str(exc))
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
