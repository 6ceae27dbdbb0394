"""
Almost Hermitian pairs at a single fiber.

A pair is a metric ``g`` (symmetric positive definite) and a nondegenerate
2-form ``omega`` (skew-symmetric), both stored as bilinear-form matrices
acting as ``X -> X^T B Y``. The pair is compatible when ``J = g^-1 omega``
squares to ``-I``. Pullback by a frame ``f`` is ``f^T B f``.
"""

from dataclasses import dataclass

import numpy as np

from .config import TOL
from .errors import (
    CompatibilityError,
    DegenerateInputError,
    GenerationError,
    InvalidInputError,
)
from .matrix_kernel import (
    as_square,
    frob,
    inv_sqrtm_spd,
    pfaffian,
    skew,
    sqrtm_spd,
    standard_symplectic,
    sym,
)

__all__ = [
    "HermitianPair",
    "compatibility_residual",
    "make_pair",
    "canonical_compatible",
    "standard_pair",
    "pullback",
    "random_frame",
    "random_pair",
    "vol_density",
]


@dataclass(frozen=True, eq=False)
class HermitianPair:
    """Compatible (g, omega) with cached ``j = g^-1 omega``.

    Build through :func:`make_pair` to get validation; the bare constructor
    trusts its arguments.
    """

    g: np.ndarray
    omega: np.ndarray
    j: np.ndarray

    @classmethod
    def unchecked(cls, g, omega):
        g = np.asarray(g, dtype=float)
        omega = np.asarray(omega, dtype=float)
        return cls(g, omega, np.linalg.solve(g, omega))

    @property
    def n(self):
        return self.g.shape[0]

    def as_dict(self):
        return {"g": self.g.tolist(), "omega": self.omega.tolist()}


def _inv_checked(M, name):
    if np.linalg.cond(M) > 1e14:
        raise DegenerateInputError(f"{name} is singular")
    return np.linalg.inv(M)


def compatibility_residual(g, omega):
    """F(g, omega) = g^-1 omega + omega^-1 g; zero iff the pair is compatible."""
    g = as_square(g, "g")
    omega = as_square(omega, "omega")
    if g.shape != omega.shape:
        raise InvalidInputError("g and omega must have the same shape")
    return _inv_checked(g, "g") @ omega + _inv_checked(omega, "omega") @ g


def make_pair(g, omega, tol=None):
    """Validate ``(g, omega)`` as an almost Hermitian pair and return it.

    Raises CompatibilityError naming the first failed invariant.
    """
    tol = tol or TOL
    g = as_square(g, "g")
    omega = as_square(omega, "omega")
    if g.shape != omega.shape:
        raise InvalidInputError("g and omega must have the same shape")
    n = g.shape[0]
    gs = max(frob(g), 1.0)
    if frob(g - g.T) > tol.structure * gs:
        raise CompatibilityError("g_symmetric", "g is not symmetric")
    lam = np.linalg.eigvalsh(sym(g))
    if lam[0] <= tol.spd_floor:
        raise CompatibilityError("g_positive", f"min eigenvalue {lam[0]:.3e}")
    ws = max(frob(omega), 1.0)
    if frob(omega + omega.T) > tol.structure * ws:
        raise CompatibilityError("omega_skew", "omega is not skew-symmetric")
    if np.linalg.cond(omega) > 1e14:
        raise CompatibilityError("omega_invertible", "omega is singular")
    resid = frob(np.linalg.solve(g, omega) + np.linalg.solve(omega, g))
    if resid > tol.compat:
        raise CompatibilityError("compatibility", f"||g^-1 w + w^-1 g|| = {resid:.3e}")
    j = np.linalg.solve(g, omega)
    jj = frob(j @ j + np.eye(n))
    if jj > tol.structure * max(1.0, frob(j)):
        raise CompatibilityError("j_squared", f"||J^2 + I|| = {jj:.3e}")
    dg, dw = np.linalg.det(g), np.linalg.det(omega)
    if abs(dg - dw) > tol.volume * max(abs(dg), abs(dw)):
        raise CompatibilityError("volume", f"det(g) = {dg:.6e}, det(omega) = {dw:.6e}")
    return HermitianPair(g, omega, j)


def canonical_compatible(g, omega, tol=None):
    """
    Retract ``(g, omega)`` onto the compatible pairs, keeping ``g``.

    With ``A = g^-1 omega`` the new structure is ``J = A (-A^2)^-1/2``
    and the new 2-form is ``g J``. Computed in the g-orthonormal picture
    ``g^-1/2 omega g^-1/2`` where -A^2 becomes an honest SPD matrix.
    Already compatible inputs come back unchanged.
    """
    g = as_square(g, "g")
    omega = as_square(omega, "omega")
    r = sqrtm_spd(g)
    ri = np.linalg.inv(r)
    a_hat = ri @ skew(omega) @ ri
    s_hat = a_hat.T @ a_hat  # = -a_hat^2 since a_hat is skew
    try:
        j_hat = a_hat @ inv_sqrtm_spd(s_hat)
    except DegenerateInputError as exc:
        raise DegenerateInputError(
            "omega is too degenerate relative to g for retraction"
        ) from exc
    return make_pair(sym(g), skew(r @ j_hat @ r), tol=tol)


def standard_pair(n):
    """``(I, block-diag [[0, 1], [-1, 0]])``."""
    return make_pair(np.eye(n), standard_symplectic(n))


def pullback(pair, f, validate=True):
    """Pull ``pair`` back by the frame ``f``: ``(f^T g f, f^T omega f)``."""
    f = as_square(f, "f")
    g = sym(f.T @ pair.g @ f)
    omega = skew(f.T @ pair.omega @ f)
    if validate:
        return make_pair(g, omega)
    return HermitianPair.unchecked(g, omega)


def random_frame(rng, n, spread, max_tries=100):
    """Draw ``f = I + spread * U[-1, 1]`` with det(f) > 1e-6."""
    for _ in range(max_tries):
        f = np.eye(n) + spread * rng.uniform(-1.0, 1.0, size=(n, n))
        if np.linalg.det(f) > 1e-6:
            return f
    raise GenerationError(f"no frame with positive determinant after {max_tries} draws")


def random_pair(seed, n, spread):
    """
    Seeded compatible pair obtained by pulling back the standard structure.

    The generator is numpy's PCG64 (``numpy.random.default_rng(seed)``),
    which is stable across numpy releases for ``uniform``.

    Returns
    -------
    pair : HermitianPair
    frame : ndarray
        The frame ``f`` with ``pair == pullback(standard_pair(n), f)``.
    """
    if n < 2 or n % 2:
        raise InvalidInputError(f"n must be even and >= 2, got {n}")
    if spread < 0:
        raise InvalidInputError("spread must be nonnegative")
    rng = np.random.default_rng(seed)
    f = random_frame(rng, n, spread)
    return pullback(standard_pair(n), f), f


def vol_density(pair):
    """Return ``(det(g)^1/2, |Pf(omega)|)``; equal for compatible pairs."""
    return float(np.sqrt(np.linalg.det(pair.g))), abs(pfaffian(pair.omega))
