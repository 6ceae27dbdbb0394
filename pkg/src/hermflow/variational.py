"""
Frame parameterization of compatible pairs and the energy functional.

A frame ``f`` (invertible matrix) and an anchor pair ``(g0, omega0)`` give
the compatible pair ``(f^T g0 f, f^T omega0 f)``. Curves of frames carry
their first two time derivatives in a :class:`FrameJet`.
"""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson, trapezoid

from .config import TOL
from .errors import DegenerateInputError, InvalidInputError
from .fiber import HermitianPair, pullback
from .matrix_kernel import as_square, expm, frob, skew, sym

__all__ = [
    "FrameJet",
    "DiscreteCurve",
    "make_jet",
    "phi_push",
    "velocity_from_frame",
    "velocity_rates",
    "first_variation_integrand",
    "equivalence_residual",
    "solve_frame_acceleration",
    "frame_geodesic",
    "curve_from_trajectory",
    "energy_curve",
    "frame_energy",
    "energy_scale",
    "first_variation_fd",
    "criticality_probe",
]


@dataclass(frozen=True, eq=False)
class FrameJet:
    f: np.ndarray
    f_t: np.ndarray
    f_tt: np.ndarray
    anchor: HermitianPair


def make_jet(anchor, f, f_t=None, f_tt=None, tol=None):
    tol = tol or TOL
    f = as_square(f, "f")
    n = f.shape[0]
    f_t = np.zeros((n, n)) if f_t is None else as_square(f_t, "f_t")
    f_tt = np.zeros((n, n)) if f_tt is None else as_square(f_tt, "f_tt")
    if np.linalg.det(f) <= tol.frame_det:
        raise DegenerateInputError("frame determinant must be positive")
    return FrameJet(f, f_t, f_tt, anchor)


def phi_push(j):
    """The compatible pair ``(f^T g0 f, f^T omega0 f)``."""
    if np.linalg.det(j.f) <= TOL.frame_det:
        raise DegenerateInputError("frame is (nearly) singular")
    return pullback(j.anchor, j.f)


def _conj_t(B0, fi, M):
    # B0^-1 f^-T M^T B0, the frame-conjugated transpose appearing throughout
    return np.linalg.solve(B0, fi.T @ M.T @ B0)


def velocity_from_frame(j):
    """
    Right-translated velocity of the pushed curve.

    ``X = f^-1 g0^-1 f^-T f_t^T g0 f + f^-1 f_t``, the same with omega0 for
    ``W``, and ``J = f^-1 g0^-1 omega0 f``.
    """
    f, ft = j.f, j.f_t
    g0, w0 = j.anchor.g, j.anchor.omega
    fi = np.linalg.inv(f)
    a = fi @ ft
    X = fi @ _conj_t(g0, fi, ft) @ f + a
    W = fi @ _conj_t(w0, fi, ft) @ f + a
    J = fi @ j.anchor.j @ f
    return X, W, J


def velocity_rates(j):
    """Time derivatives ``(X_t, W_t)`` by the product rule on the frame formulas."""
    f, ft, ftt = j.f, j.f_t, j.f_tt
    fi = np.linalg.inv(f)
    fi_t = -fi @ ft @ fi
    out = []
    for B0 in (j.anchor.g, j.anchor.omega):
        B0i = np.linalg.inv(B0)
        # X = fi B0i fi^T ft^T B0 f + fi ft
        d = (fi_t @ B0i @ fi.T @ ft.T @ B0 @ f
             + fi @ B0i @ fi_t.T @ ft.T @ B0 @ f
             + fi @ B0i @ fi.T @ ftt.T @ B0 @ f
             + fi @ B0i @ fi.T @ ft.T @ B0 @ ft
             + fi_t @ ft + fi @ ftt)
        out.append(d)
    return tuple(out)


def first_variation_integrand(j):
    """
    The matrix E(g0, omega0, f; t) driving the first variation of the energy.

    For a variation ``f(t, s)`` with fixed endpoints,
    ``dE/ds = 2 * int tr(E f_s f^-1) det(f) dt`` (times the reference
    volume). E vanishes exactly along frame curves whose pushed pairs are
    geodesics.

    Written out term by term: ten terms built from g0, the same ten with
    omega0.
    """
    f, ft, ftt = j.f, j.f_t, j.f_tt
    n = f.shape[0]
    I = np.eye(n)
    fi = np.linalg.inv(f)
    a = ft @ fi                      # f_t f^-1
    s = ftt @ fi                     # f_tt f^-1
    tr_a = np.trace(a)
    E = np.zeros((n, n))
    for B0 in (j.anchor.g, j.anchor.omega):
        b = _conj_t(B0, fi, ft)      # B0^-1 (f^T)^-1 f_t^T B0
        c = _conj_t(B0, fi, ftt)     # B0^-1 (f^T)^-1 f_tt^T B0
        E += (
            -2 * s
            - 2 * c
            + 2 * a @ a
            - 2 * tr_a * a
            + np.trace(a @ a) * I
            - 2 * b @ a
            + 2 * b @ b
            + 2 * a @ b
            - 2 * tr_a * b
            + np.trace(b @ a) * I
        )
    return E


def equivalence_residual(j):
    """
    Compare the frame equation with the sum rule of the geodesic flow.

    Returns ``(f^-1 E f, X_t + W_t + tr(X)/2 X + tr(W)/2 W - (tr X^2 + tr W^2)/4 I)``.
    The two are proportional with a universal constant.
    """
    f = j.f
    E = first_variation_integrand(j)
    lhs = np.linalg.solve(f, E @ f)
    X, W, _ = velocity_from_frame(j)
    Xt, Wt = velocity_rates(j)
    n = f.shape[0]
    rhs = (Xt + Wt + 0.5 * np.trace(X) * X + 0.5 * np.trace(W) * W
           - 0.25 * (np.trace(X @ X) + np.trace(W @ W)) * np.eye(n))
    return lhs, rhs


def _transpose_perm(n):
    P = np.zeros((n * n, n * n))
    for i in range(n):
        for k in range(n):
            P[k * n + i, i * n + k] = 1.0
    return P


def solve_frame_acceleration(anchor, f, f_t):
    """
    Solve ``E(g0, omega0, f; t) = 0`` for ``f_tt``.

    E is affine in ``Z = f_tt f^-1``; the linear part annihilates the
    unitary gauge directions, so the minimum-norm solution is returned.
    """
    n = f.shape[0]
    E0 = first_variation_integrand(FrameJet(f, f_t, np.zeros((n, n)), anchor))
    P = _transpose_perm(n)
    L = -4.0 * np.eye(n * n)
    for B0 in (anchor.g, anchor.omega):
        L -= 2.0 * np.kron(np.linalg.inv(B0), B0.T) @ P
    z, *_ = np.linalg.lstsq(L, -E0.ravel(), rcond=1e-12)
    return z.reshape(n, n) @ f


def frame_geodesic(anchor, f_t0, t_end=1.0, dt=1e-3, f0=None):
    """
    Integrate the frame equation ``E = 0`` with RK4 from ``f(0) = f0``.

    Returns ``(times, f, f_t)`` stacked over time.
    """
    n = anchor.n
    f = np.eye(n) if f0 is None else np.asarray(f0, float)
    v = np.asarray(f_t0, float)
    steps = max(1, int(round(t_end / dt)))
    h = t_end / steps
    F = [f]
    Ft = [v]

    def rhs(f, v):
        return v, solve_frame_acceleration(anchor, f, v)

    for _ in range(steps):
        k1 = rhs(f, v)
        k2 = rhs(f + 0.5 * h * k1[0], v + 0.5 * h * k1[1])
        k3 = rhs(f + 0.5 * h * k2[0], v + 0.5 * h * k2[1])
        k4 = rhs(f + h * k3[0], v + h * k3[1])
        f = f + h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        v = v + h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        F.append(f)
        Ft.append(v)
    return np.linspace(0.0, t_end, steps + 1), np.array(F), np.array(Ft)


@dataclass(frozen=True, eq=False)
class DiscreteCurve:
    """
    Knot samples of a curve of pairs at one spatial point.

    ``g`` and ``omega`` are stacked (K, n, n). When ``f`` and ``f_t`` are
    given (frame samples over ``anchor``), velocities come from the frame
    formulas instead of finite differences.
    """

    times: np.ndarray
    g: np.ndarray
    omega: np.ndarray
    quadrature: str = "simpson"
    f: np.ndarray = None
    f_t: np.ndarray = None
    anchor: HermitianPair = None

    def __post_init__(self):
        t = np.asarray(self.times, float)
        if t.ndim != 1 or len(t) < 3:
            raise InvalidInputError("a discrete curve needs at least 3 knots")
        steps = np.diff(t)
        if np.any(steps <= 0) or np.ptp(steps) > 1e-9 * steps.mean():
            raise InvalidInputError("knot times must be uniformly spaced and increasing")
        if self.quadrature not in ("trapezoid", "simpson"):
            raise InvalidInputError(f"unknown quadrature rule {self.quadrature!r}")
        if self.g.shape != (len(t),) + self.g.shape[1:] or self.g.shape != self.omega.shape:
            raise InvalidInputError("g and omega must be stacked per knot")

    @classmethod
    def from_frames(cls, anchor, times, f, f_t, quadrature="simpson"):
        f = np.asarray(f, float)
        g = sym(np.swapaxes(f, 1, 2) @ anchor.g @ f)
        omega = skew(np.swapaxes(f, 1, 2) @ anchor.omega @ f)
        return cls(np.asarray(times, float), g, omega, quadrature, f, np.asarray(f_t, float), anchor)


def curve_from_trajectory(traj, quadrature="simpson"):
    return DiscreteCurve(traj.times, traj.g, traj.omega, quadrature)


def _quad(y, t, rule):
    if rule == "simpson":
        return float(simpson(y, x=t))
    return float(trapezoid(y, x=t))


def _curve_velocities(curve):
    if curve.f is not None:
        X = np.empty_like(curve.g)
        W = np.empty_like(curve.g)
        for k in range(len(curve.times)):
            jet = FrameJet(curve.f[k], curve.f_t[k], np.zeros_like(curve.f[k]), curve.anchor)
            X[k], W[k], _ = velocity_from_frame(jet)
        return X, W
    g_t = np.gradient(curve.g, curve.times, axis=0, edge_order=2)
    w_t = np.gradient(curve.omega, curve.times, axis=0, edge_order=2)
    return np.linalg.solve(curve.g, g_t), np.linalg.solve(curve.omega, w_t)


def _vol_ratio(curve):
    _, ld = np.linalg.slogdet(curve.g)
    return np.exp(0.5 * (ld - ld[0]))


def _energy_one(curve):
    X, W = _curve_velocities(curve)
    dens = np.einsum("kij,kji->k", X, X) + np.einsum("kij,kji->k", W, W)
    return _quad(dens * _vol_ratio(curve), curve.times, curve.quadrature)


def energy_curve(curves, weights=None):
    """
    Energy of one curve, or of several curves sampled at weighted points.

    Each point contributes ``weight * int (tr X^2 + tr W^2) det(g0^-1 g)^1/2 dt``
    with g0 the first knot.
    """
    if isinstance(curves, DiscreteCurve):
        curves = [curves]
    if weights is None:
        weights = np.ones(len(curves))
    weights = np.asarray(weights, float)
    if len(weights) != len(curves):
        raise InvalidInputError("one weight per curve is required")
    total = 0.0
    for w, c in zip(weights, curves):
        total += w * _energy_one(c)
    return total


def frame_energy(anchor, times, f, f_t, weight=1.0, quadrature="simpson"):
    """Energy of the pushed frame curve written directly in f and f_t, with det(f) as volume."""
    times = np.asarray(times, float)
    g0, w0 = anchor.g, anchor.omega
    g0i, w0i = np.linalg.inv(g0), np.linalg.inv(w0)
    dens = np.empty(len(times))
    for k in range(len(times)):
        fk, fk_t = f[k], f_t[k]
        if np.linalg.det(fk) <= TOL.frame_det:
            raise DegenerateInputError(f"frame determinant not positive at knot {k}")
        fi = np.linalg.inv(fk)
        Pg = fi @ g0i @ fi.T @ (fk_t.T @ g0 @ fk + fk.T @ g0 @ fk_t)
        Pw = fi @ w0i @ fi.T @ (fk_t.T @ w0 @ fk + fk.T @ w0 @ fk_t)
        dens[k] = (np.trace(Pg @ Pg) + np.trace(Pw @ Pw)) * np.linalg.det(fk)
    return weight * _quad(dens, times, quadrature)


def energy_scale(curve):
    """Positive reference scale ``int (|X|_F^2 + |W|_F^2) p dt`` for normalizing probes."""
    X, W = _curve_velocities(curve)
    dens = np.sum(X**2, axis=(1, 2)) + np.sum(W**2, axis=(1, 2))
    return _quad(dens * _vol_ratio(curve), curve.times, curve.quadrature)


def _bump(times):
    a, b = times[0], times[-1]
    return np.sin(np.pi * (times - a) / (b - a)) ** 2


def first_variation_fd(curve, seed, eps=1e-4, amplitude=1.0):
    """
    Central finite-difference derivative of the discrete energy along a
    random variation with fixed endpoints.

    The variation pulls each knot back by ``expm(s * bump(t) * B)`` with
    ``B`` Gaussian of unit Frobenius norm, so every perturbed knot is
    still a compatible pair. Returns ``|dE/ds|`` at ``s = 0``.
    """
    if amplitude == 0:
        return 0.0
    n = curve.g.shape[-1]
    rng = np.random.default_rng(seed)
    B = rng.standard_normal((n, n))
    B *= amplitude / frob(B)
    psi = _bump(curve.times)

    def energy_at(s):
        F = np.array([expm(s * p * B) for p in psi])
        Ft = np.swapaxes(F, 1, 2)
        c = DiscreteCurve(curve.times, sym(Ft @ curve.g @ F), skew(Ft @ curve.omega @ F),
                          curve.quadrature)
        return energy_curve(c)

    return abs(energy_at(eps) - energy_at(-eps)) / (2 * eps)


def criticality_probe(init, traj, perturbation_seed, quadrature="simpson", eps=1e-4,
                      amplitude=1.0):
    """First-variation probe of an integrated trajectory; near zero for geodesics."""
    if not np.allclose(traj.g[0], init.pair0.g) or not np.allclose(traj.omega[0], init.pair0.omega):
        raise InvalidInputError("trajectory does not start at the initial pair")
    return first_variation_fd(curve_from_trajectory(traj, quadrature), perturbation_seed,
                              eps=eps, amplitude=amplitude)
