"""
Finite weighted point sets standing in for the base manifold.

The geodesic equation has no spatial derivatives, so points never talk to
each other; only aggregates (energies) couple them through the weights.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson, trapezoid

from .errors import HermflowError, InvalidInputError

__all__ = ["SampledField", "FieldError", "worker_count", "map_pointwise", "global_energy"]


class FieldError(HermflowError):
    """One or more points failed; ``errors`` maps point_id to the exception."""

    def __init__(self, errors):
        ids = ", ".join(str(k) for k in errors)
        super().__init__(f"{len(errors)} point(s) failed: {ids}")
        self.errors = errors


@dataclass(frozen=True, eq=False)
class SampledField:
    point_ids: tuple
    items: tuple
    weights: np.ndarray

    def __post_init__(self):
        if len(self.point_ids) != len(self.items) or len(self.items) != len(self.weights):
            raise InvalidInputError("point_ids, items and weights must have equal length")
        if len(set(self.point_ids)) != len(self.point_ids):
            raise InvalidInputError("point ids must be unique")
        if np.any(np.asarray(self.weights) <= 0):
            raise InvalidInputError("weights must be positive")

    @classmethod
    def build(cls, items, weights=None, point_ids=None):
        items = tuple(items)
        if point_ids is None:
            point_ids = tuple(range(len(items)))
        if weights is None:
            weights = np.ones(len(items))
        return cls(tuple(point_ids), items, np.asarray(weights, dtype=float))

    def __len__(self):
        return len(self.items)


def worker_count(threads=None):
    """Resolve the worker cap: explicit value, then HERMFLOW_THREADS, then CPU count."""
    if threads is None:
        env = os.environ.get("HERMFLOW_THREADS")
        if env is not None:
            try:
                threads = int(env)
            except ValueError:
                raise InvalidInputError("HERMFLOW_THREADS must be a positive integer") from None
        else:
            threads = os.cpu_count() or 1
    if threads < 1:
        raise InvalidInputError("worker count must be a positive integer")
    return threads


def map_pointwise(field, op, threads=None):
    """
    Apply ``op`` to every point of ``field``.

    Output order follows input order regardless of scheduling. Exceptions
    are gathered per point and raised together as :class:`FieldError`.
    """
    workers = min(worker_count(threads), max(1, len(field)))

    def run(item):
        try:
            return True, op(item)
        except Exception as exc:  # collected, re-raised below
            return False, exc

    if workers == 1:
        results = [run(item) for item in field.items]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, field.items))

    errors = {pid: res for pid, (ok, res) in zip(field.point_ids, results) if not ok}
    if errors:
        raise FieldError(errors)
    return SampledField(field.point_ids, tuple(res for _, res in results), field.weights)


def global_energy(trajectories, weights, quadrature="trapezoid"):
    """
    Weighted sum over points of the time integral of ``(tr X^2 + tr W^2) p``.

    Trajectories must share one time grid. The sum runs left to right in
    the given order so repeated runs agree bit for bit.
    """
    trajectories = list(trajectories)
    weights = np.asarray(weights, dtype=float)
    if len(trajectories) != len(weights):
        raise InvalidInputError("one weight per trajectory is required")
    if not trajectories:
        return 0.0
    t0 = trajectories[0].times
    total = 0.0
    for w, tr in zip(weights, trajectories):
        if tr.times.shape != t0.shape or not np.array_equal(tr.times, t0):
            raise InvalidInputError("trajectories do not share a time grid")
        total += float(w) * _point_energy(tr, quadrature)
    return total


def _point_energy(tr, quadrature):
    if "I1" in tr.monitors:
        dens = tr.monitors["I1"]
    else:
        x, w = tr.x, tr.w
        _, ld = np.linalg.slogdet(tr.g)
        dens = (np.einsum("kij,kji->k", x, x) + np.einsum("kij,kji->k", w, w)) * np.exp(0.5 * (ld - ld[0]))
    if quadrature == "simpson":
        return float(simpson(dens, x=tr.times))
    if quadrature == "trapezoid":
        return float(trapezoid(dens, x=tr.times))
    raise InvalidInputError(f"unknown quadrature rule {quadrature!r}")
