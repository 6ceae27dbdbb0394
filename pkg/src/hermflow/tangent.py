"""
Tangent vectors at a fiber point in right-translated form.

A tangent vector ``(h, alpha)`` of the product of metrics and 2-forms is
stored as ``(H, A) = (g^-1 h, omega^-1 alpha)``. It is tangent to the
compatible pairs iff ``JH + HJ = JA + AJ``, i.e. the J-commuting parts of
H and A agree.
"""

from dataclasses import dataclass

import numpy as np

from .config import TOL
from .errors import InvalidInputError
from .matrix_kernel import _split, as_square, frob, skew, sym

__all__ = [
    "TangentPair",
    "SplitComponents",
    "tangent_pair",
    "to_tangent_rep",
    "to_ambient",
    "tangency_residual",
    "split4",
    "project_tangent",
    "project_normal",
    "fiber_inner",
    "random_ambient",
    "random_tangent",
]


@dataclass(frozen=True, eq=False)
class TangentPair:
    h_cap: np.ndarray
    a_cap: np.ndarray
    anchor: object  # HermitianPair

    def __add__(self, other):
        _same_anchor(self, other)
        return TangentPair(self.h_cap + other.h_cap, self.a_cap + other.a_cap, self.anchor)

    def __sub__(self, other):
        _same_anchor(self, other)
        return TangentPair(self.h_cap - other.h_cap, self.a_cap - other.a_cap, self.anchor)

    def __mul__(self, c):
        return TangentPair(c * self.h_cap, c * self.a_cap, self.anchor)

    __rmul__ = __mul__

    def norm(self):
        """Frobenius norm of the stacked (H, A); not the fiber metric."""
        return float(np.sqrt(frob(self.h_cap) ** 2 + frob(self.a_cap) ** 2))


@dataclass(frozen=True, eq=False)
class SplitComponents:
    n1: TangentPair
    n2: TangentPair
    n3: TangentPair
    n4: TangentPair

    def __iter__(self):
        return iter((self.n1, self.n2, self.n3, self.n4))


def _same_anchor(t1, t2):
    a, b = t1.anchor, t2.anchor
    if a is b:
        return
    if not (np.array_equal(a.g, b.g) and np.array_equal(a.omega, b.omega)):
        raise InvalidInputError("tangent vectors are anchored at different fiber points")


def tangent_pair(anchor, H, A, tol=None):
    """Wrap right-translated ``(H, A)`` after checking their symmetry types."""
    tol = tol or TOL
    H = as_square(H, "H")
    A = as_square(A, "A")
    gH = anchor.g @ H
    wA = anchor.omega @ A
    if frob(gH - gH.T) > tol.structure * max(1.0, frob(gH)):
        raise InvalidInputError("g H is not symmetric")
    if frob(wA + wA.T) > tol.structure * max(1.0, frob(wA)):
        raise InvalidInputError("omega A is not skew-symmetric")
    return TangentPair(H, A, anchor)


def to_tangent_rep(pair, h, alpha, tol=None):
    """Convert an ambient ``(h, alpha)`` to ``(H, A) = (g^-1 h, omega^-1 alpha)``."""
    tol = tol or TOL
    h = as_square(h, "h")
    alpha = as_square(alpha, "alpha")
    if frob(h - h.T) > tol.structure * max(1.0, frob(h)):
        raise InvalidInputError("h is not symmetric")
    if frob(alpha + alpha.T) > tol.structure * max(1.0, frob(alpha)):
        raise InvalidInputError("alpha is not skew-symmetric")
    H = np.linalg.solve(pair.g, h)
    A = np.linalg.solve(pair.omega, alpha)
    return TangentPair(H, A, pair)


def to_ambient(t):
    """Inverse of :func:`to_tangent_rep`: ``(g H, omega A)``."""
    return sym(t.anchor.g @ t.h_cap), skew(t.anchor.omega @ t.a_cap)


def tangency_residual(t):
    """``JH + HJ - JA - AJ``; vanishes iff ``t`` is tangent to the compatible pairs."""
    J, H, A = t.anchor.j, t.h_cap, t.a_cap
    return J @ H + H @ J - J @ A - A @ J


def split4(t):
    """Decompose ``t`` into the four orthogonal pieces n1..n4.

    n1 = (H_a, 0), n2 = (0, A_a), n3 = (S, S), n4 = (D, -D) with
    S = (H_c + A_c)/2 and D = (H_c - A_c)/2; c/a mark the parts that
    commute/anticommute with J. n1 + n2 + n3 is the tangential part.
    """
    J = t.anchor.j
    Hc, Ha = _split(J, t.h_cap)
    Ac, Aa = _split(J, t.a_cap)
    z = np.zeros_like(Hc)
    s = 0.5 * (Hc + Ac)
    d = 0.5 * (Hc - Ac)
    p = t.anchor
    return SplitComponents(
        TangentPair(Ha, z, p),
        TangentPair(z.copy(), Aa, p),
        TangentPair(s, s.copy(), p),
        TangentPair(d, -d, p),
    )


def project_tangent(t):
    J, H, A = t.anchor.j, t.h_cap, t.a_cap
    JHJ = J @ H @ J
    JAJ = J @ A @ J
    return TangentPair(
        (3 * H + JHJ + A - JAJ) / 4,
        (3 * A + JAJ + H - JHJ) / 4,
        t.anchor,
    )


def project_normal(t):
    J, H, A = t.anchor.j, t.h_cap, t.a_cap
    JHJ = J @ H @ J
    JAJ = J @ A @ J
    return TangentPair(
        (H - JHJ - A + JAJ) / 4,
        (A - JAJ - H + JHJ) / 4,
        t.anchor,
    )


def fiber_inner(t1, t2):
    """Pointwise product metric ``tr(H1 H2) + tr(A1 A2)`` (indefinite on 2-forms)."""
    _same_anchor(t1, t2)
    return float(
        np.einsum("ij,ji->", t1.h_cap, t2.h_cap) + np.einsum("ij,ji->", t1.a_cap, t2.a_cap)
    )


def random_ambient(pair, rng):
    """Ambient tangent vector from Gaussian symmetric h and skew alpha."""
    n = pair.n
    h = sym(rng.standard_normal((n, n)))
    alpha = skew(rng.standard_normal((n, n)))
    return TangentPair(np.linalg.solve(pair.g, h), np.linalg.solve(pair.omega, alpha), pair)


def random_tangent(pair, rng, scale=1.0):
    """Random tangent vector (projected ambient draw) with ``norm() == scale``."""
    t = project_tangent(random_ambient(pair, rng))
    nrm = t.norm()
    return t * (scale / nrm) if nrm > 0 else t
