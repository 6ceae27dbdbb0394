"""
Geodesic flow on compatible pairs.

The state is ``(g, omega, X, W)`` with right-translated velocities
``X = g^-1 g_t`` and ``W = omega^-1 omega_t``. The flow is

    g_t = g X,    omega_t = omega W,    X_t = U,    W_t = V,

where ``(U, V)`` is fixed by three linear conditions:

* sum rule:        U + V = -tr(X)/2 X - tr(W)/2 W + (tr X^2 + tr W^2)/4 I
* commutator rule: the J-anticommuting part of U + tr(X)/2 X vanishes
* closure:         (U - V)_c keeps JX + XJ = JW + WJ true along the flow,
                   obtained by differentiating it with J_t = J W - X J.

The first two conditions say the ambient acceleration is normal to the
compatible pairs; the third keeps the curve on them.
"""

from dataclasses import dataclass, field

import numpy as np

from .config import TOL
from .errors import DomainError, DriftError, InvalidInputError, NumericalFailureError
from .fiber import HermitianPair, canonical_compatible
from .matrix_kernel import _split, as_square, expm, frob, pfaffian, skew, sym
from .tangent import TangentPair, project_tangent

__all__ = [
    "GeodesicState",
    "InitialData",
    "Trajectory",
    "make_initial",
    "geodesic_rhs",
    "rhs_oracle_lsq",
    "projected_residual",
    "step_rk4",
    "integrate",
    "observables",
    "p_predicted",
    "fixed_omega_geodesic",
    "fixed_g_geodesic",
    "conformal_geodesic",
]


@dataclass(frozen=True, eq=False)
class GeodesicState:
    pair: HermitianPair
    x_vel: np.ndarray
    w_vel: np.ndarray

    @classmethod
    def from_arrays(cls, g, omega, X, W):
        return cls(HermitianPair.unchecked(g, omega), np.asarray(X, float), np.asarray(W, float))

    def arrays(self):
        return self.pair.g, self.pair.omega, self.x_vel, self.w_vel


@dataclass(frozen=True, eq=False)
class InitialData:
    pair0: HermitianPair
    h0: np.ndarray
    a0: np.ndarray

    @property
    def C(self):
        return float(np.einsum("ij,ji->", self.h0, self.h0) + np.einsum("ij,ji->", self.a0, self.a0))

    @property
    def trH(self):
        return float(np.trace(self.h0))

    @property
    def n(self):
        return self.pair0.n

    def state(self):
        return GeodesicState(self.pair0, self.h0, self.a0)


def make_initial(pair, H, A=None, tol=None):
    """Build :class:`InitialData`; accepts a TangentPair as second argument."""
    tol = tol or TOL
    if isinstance(H, TangentPair):
        H, A = H.h_cap, H.a_cap
    H = as_square(H, "H")
    A = as_square(A, "A")
    J = pair.j
    scale = max(1.0, frob(H) + frob(A))
    r = frob(J @ H + H @ J - J @ A - A @ J)
    if r > tol.structure * scale:
        raise InvalidInputError(f"(H, A) is not tangent (residual {r:.3e})")
    if abs(np.trace(H) - np.trace(A)) > tol.structure * scale:
        raise InvalidInputError("tr(H) != tr(A)")
    return InitialData(pair, H, A)


@dataclass(eq=False)
class Trajectory:
    """Time series of states, stored as stacked arrays.

    ``g``, ``omega``, ``x``, ``w`` have shape (len(times), n, n).
    ``monitors`` maps a name to a per-time array.
    """

    times: np.ndarray
    g: np.ndarray
    omega: np.ndarray
    x: np.ndarray
    w: np.ndarray
    monitors: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.times)

    def state(self, i):
        return GeodesicState.from_arrays(self.g[i], self.omega[i], self.x[i], self.w[i])

    @property
    def states(self):
        return [self.state(i) for i in range(len(self))]

    def max_drift(self):
        return max(float(np.max(self.monitors["compat_resid"])),
                   float(np.max(self.monitors["tang_resid"])))


def _tr(M):
    return np.trace(M, axis1=-2, axis2=-1)


def _accel(g, omega, X, W):
    n = g.shape[-1]
    eye = np.eye(n)
    J = np.linalg.solve(g, omega)
    tx, tw = np.trace(X), np.trace(W)
    R = -0.5 * tx * X - 0.5 * tw * W + 0.25 * (_tr(X @ X) + _tr(W @ W)) * eye
    _, Xa = _split(J, X)
    Rc, Ra = _split(J, R)
    Jt = J @ W - X @ J
    D = X - W
    K, _ = _split(J, 0.5 * (Jt @ D @ J + J @ D @ Jt))
    Ua = -0.5 * tx * Xa
    Uc = 0.5 * (Rc + K)
    Vc = 0.5 * (Rc - K)
    return Uc + Ua, Vc + (Ra - Ua)


def geodesic_rhs(s):
    """Return ``(X_t, W_t)`` at the state ``s``."""
    U, V = _accel(*s.arrays())
    if not (np.all(np.isfinite(U)) and np.all(np.isfinite(V))):
        raise NumericalFailureError("non-finite acceleration")
    return U, V


def rhs_oracle_lsq(s):
    """
    Solve for ``(X_t, W_t)`` as one stacked least-squares problem.

    The three defining conditions are written in their raw, unsplit form
    (commutator with J, differentiated tangency) and vectorized over the
    2 n^2 unknowns. Used to cross-check :func:`geodesic_rhs`.
    """
    g, omega, X, W = s.arrays()
    n = g.shape[0]
    I = np.eye(n)
    N = n * n
    J = np.linalg.solve(g, omega)
    tx, tw = np.trace(X), np.trace(W)
    R = -0.5 * tx * X - 0.5 * tw * W + 0.25 * (np.trace(X @ X) + np.trace(W @ W)) * I
    Jt = J @ W - X @ J
    D = X - W
    # row-major vec: vec(P M Q) = kron(P, Q^T) vec(M)
    left = np.kron(J, I)
    right = np.kron(I, J.T)
    comm = left - right
    anti = left + right
    Z = np.zeros((N, N))
    M = np.block([
        [np.eye(N), np.eye(N)],
        [comm, Z],
        [anti, -anti],
    ])
    b = np.concatenate([
        R.ravel(),
        (-0.5 * tx * (J @ X - X @ J)).ravel(),
        (-(Jt @ D + D @ Jt)).ravel(),
    ])
    z, _, rank, _ = np.linalg.lstsq(M, b, rcond=None)
    if rank < 2 * N:
        raise NumericalFailureError(f"oracle system rank {rank} < {2 * N}")
    res = np.linalg.norm(M @ z - b)
    if res > 1e-10 * max(1.0, np.linalg.norm(b)):
        raise NumericalFailureError(f"oracle system inconsistent (residual {res:.3e})")
    return z[:N].reshape(n, n), z[N:].reshape(n, n)


def projected_residual(s, U, V):
    """Both matrix expressions of the projected geodesic equation at ``(U, V)``.

    Each vanishes iff the tangential part of the ambient acceleration is zero.
    """
    g, omega, X, W = s.arrays()
    n = g.shape[0]
    I = np.eye(n)
    J = np.linalg.solve(g, omega)
    tx, tw = np.trace(X), np.trace(W)
    tx2, tw2 = np.trace(X @ X), np.trace(W @ W)
    first = (3 * U + 1.5 * tx * X - 0.5 * tx2 * I + J @ U @ J + 0.5 * tx * J @ X @ J
             + V + 0.5 * tw * W - 0.5 * tw2 * I - J @ V @ J - 0.5 * tw * J @ W @ J)
    second = (3 * V + 1.5 * tw * W - 0.5 * tw2 * I + J @ V @ J + 0.5 * tw * J @ W @ J
              + U + 0.5 * tx * X - 0.5 * tx2 * I - J @ U @ J - 0.5 * tx * J @ X @ J)
    return first, second


def _field(y):
    g, omega, X, W = y
    U, V = _accel(g, omega, X, W)
    return (g @ X, omega @ W, U, V)


def _rk4(y, dt):
    k1 = _field(y)
    k2 = _field(tuple(a + 0.5 * dt * b for a, b in zip(y, k1)))
    k3 = _field(tuple(a + 0.5 * dt * b for a, b in zip(y, k2)))
    k4 = _field(tuple(a + dt * b for a, b in zip(y, k3)))
    return tuple(
        a + dt / 6.0 * (b1 + 2 * b2 + 2 * b3 + b4)
        for a, b1, b2, b3, b4 in zip(y, k1, k2, k3, k4)
    )


def _residuals(g, omega, X, W):
    J = np.linalg.solve(g, omega)
    compat = frob(J + np.linalg.solve(omega, g))
    tang = frob(J @ X + X @ J - J @ W - W @ J)
    return compat, tang


def _structure_residual(g, omega, X, W):
    gX = g @ X
    wW = omega @ W
    return max(frob(gX - gX.T) / max(1.0, frob(gX)), frob(wW + wW.T) / max(1.0, frob(wW)))


def step_rk4(s, dt, tol=None):
    """One classical RK4 step of the first-order system."""
    tol = tol or TOL
    if dt < 0:
        raise InvalidInputError("dt must be nonnegative")
    g, omega, X, W = _rk4(s.arrays(), dt)
    worst = max(*_residuals(g, omega, X, W), _structure_residual(g, omega, X, W))
    if not np.isfinite(worst) or worst > tol.drift_abort:
        raise DriftError("state left the constraint set", residual=worst)
    return GeodesicState.from_arrays(sym(g), skew(omega), X, W)


def _retract(g, omega, X, W, tol):
    pair = canonical_compatible(g, omega, tol=tol)
    h = sym(g @ X)
    alpha = skew(omega @ W)
    t = TangentPair(np.linalg.solve(pair.g, h), np.linalg.solve(pair.omega, alpha), pair)
    t = project_tangent(t)
    return pair.g, pair.omega, t.h_cap, t.a_cap


def integrate(init, t_end=1.0, dt=1e-3, retraction_every=None, tol=None):
    """
    Integrate the geodesic from ``init`` over ``[0, t_end]`` with RK4.

    The step is adjusted to ``t_end / round(t_end / dt)`` so the grid hits
    ``t_end`` exactly. With ``retraction_every = k`` the pair is pulled back
    onto the compatible set (keeping g) and the velocity re-projected every
    k steps; otherwise drift is only measured.

    Raises DriftError if a residual exceeds ``tol.drift_abort``.
    """
    tol = tol or TOL
    if not (dt > 0 and t_end > 0):
        raise InvalidInputError("dt and t_end must be positive")
    if retraction_every is not None and retraction_every < 1:
        raise InvalidInputError("retraction_every must be a positive integer")
    steps = max(1, int(round(t_end / dt)))
    h = t_end / steps
    n = init.n
    times = np.linspace(0.0, t_end, steps + 1)
    G = np.empty((steps + 1, n, n))
    Om = np.empty_like(G)
    Xs = np.empty_like(G)
    Ws = np.empty_like(G)
    compat = np.empty(steps + 1)
    tang = np.empty(steps + 1)

    y = (init.pair0.g, init.pair0.omega, init.h0, init.a0)
    for k in range(steps + 1):
        if k > 0:
            y = _rk4(y, h)
            if retraction_every and k % retraction_every == 0:
                y = _retract(*y, tol)
        G[k], Om[k], Xs[k], Ws[k] = y
        compat[k], tang[k] = _residuals(*y)
        worst = max(compat[k], tang[k])
        if not np.isfinite(worst) or worst > tol.drift_abort:
            raise DriftError("trajectory left the constraint set", time=times[k], residual=worst)

    traj = Trajectory(times, G, Om, Xs, Ws, {"compat_resid": compat, "tang_resid": tang})
    traj.monitors.update(observables(traj, init))
    return traj


def p_predicted(init, t):
    """Closed-form volume ratio p(t) and its derivative."""
    t = np.asarray(t, dtype=float)
    a = init.n / 32.0 * init.C
    b = 0.5 * init.trH
    return a * t**2 + b * t + 1.0, 2 * a * t + b


def observables(traj, init):
    """
    Per-time observables of a trajectory against their closed forms.

    Returns a dict of arrays: ``p_num`` (= det(g0^-1 g)^1/2), ``p_pred``,
    ``trX_num``, ``trW_num``, ``trX_pred`` (= 2 p'/p), ``xw_dev``
    (Frobenius distance of X + W to its prediction), ``e_density``
    (tr X^2 + tr W^2) and ``I1`` (= e_density * p_num, constant C).
    """
    t = traj.times
    n = init.n
    _, ld0 = np.linalg.slogdet(init.pair0.g)
    _, ld = np.linalg.slogdet(traj.g)
    p_num = np.exp(0.5 * (ld - ld0))
    p_pred, dp = p_predicted(init, t)
    trX = _tr(traj.x)
    trW = _tr(traj.w)
    e_density = _tr(traj.x @ traj.x) + _tr(traj.w @ traj.w)
    pred_xw = (0.25 * init.C * t[:, None, None] * np.eye(n) + init.h0 + init.a0) / p_pred[:, None, None]
    xw_dev = np.linalg.norm(traj.x + traj.w - pred_xw, axis=(1, 2))
    return {
        "p_num": p_num,
        "p_pred": p_pred,
        "trX_num": trX,
        "trW_num": trW,
        "trX_pred": 2 * dp / p_pred,
        "xw_dev": xw_dev,
        "e_density": e_density,
        "I1": e_density * p_num,
    }


def fixed_omega_geodesic(g, h0_traceless, t, tol=None):
    """``g exp(t H0)`` with ``H0 = g^-1 h0``; a geodesic among metrics of fixed volume."""
    tol = tol or TOL
    g = as_square(g, "g")
    H0 = np.linalg.solve(g, as_square(h0_traceless, "h0"))
    if abs(np.trace(H0)) > tol.structure * max(1.0, frob(H0)):
        raise InvalidInputError("g^-1 h0 must be traceless")
    return sym(g @ expm(t * H0))


def fixed_g_geodesic(omega, a0_traceless, t, tol=None):
    """``omega exp(t A0)`` with ``A0 = omega^-1 alpha0``; |Pf| stays constant."""
    tol = tol or TOL
    omega = as_square(omega, "omega")
    alpha0 = as_square(a0_traceless, "alpha0")
    if frob(alpha0 + alpha0.T) > tol.structure * max(1.0, frob(alpha0)):
        raise InvalidInputError("alpha0 must be skew-symmetric")
    A0 = np.linalg.solve(omega, alpha0)
    if abs(np.trace(A0)) > tol.structure * max(1.0, frob(A0)):
        raise InvalidInputError("omega^-1 alpha0 must be traceless")
    return skew(omega @ expm(t * A0))


def conformal_geodesic(pair0, c0, t):
    """
    Closed-form geodesic with ``X = W = c(t) I``.

    ``c(t) = c0 / (1 + n c0 t / 4)`` and both g and omega scale by
    ``(1 + n c0 t / 4)^(4/n)``. Raises DomainError at or past the pole.
    """
    n = pair0.n
    base = 1.0 + n * c0 * t / 4.0
    if base <= 0:
        raise DomainError(f"conformal geodesic has left the cone at t={t}")
    phi = base ** (4.0 / n)
    c = c0 / base
    return GeodesicState.from_arrays(phi * pair0.g, phi * pair0.omega, c * np.eye(n), c * np.eye(n))


def volume_pair(g, omega):
    """Convenience: ``(det(g)^1/2, |Pf(omega)|)`` for unvalidated matrices."""
    return float(np.sqrt(np.linalg.det(g))), abs(pfaffian(omega))
