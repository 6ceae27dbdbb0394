"""
Dense small-matrix primitives.

Everything here works on plain ``numpy.ndarray`` objects of shape (n, n)
with n even. Fibers are tiny (n <= 64), so nothing is sparse and nothing
is clever about memory.
"""

import numpy as np
import scipy.linalg

from .config import TOL
from .errors import DegenerateInputError, InvalidInputError

__all__ = [
    "as_square",
    "sym",
    "skew",
    "frob",
    "standard_symplectic",
    "expm",
    "sqrtm_spd",
    "inv_sqrtm_spd",
    "pfaffian",
    "comm_split",
]


def as_square(M, name="matrix", even=True):
    """Return ``M`` as a finite float (n, n) array, or raise InvalidInputError."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InvalidInputError(f"{name} must be square, got shape {M.shape}")
    n = M.shape[0]
    if even and (n < 2 or n % 2):
        raise InvalidInputError(f"{name} dimension must be even and >= 2, got {n}")
    if not np.all(np.isfinite(M)):
        raise InvalidInputError(f"{name} has non-finite entries")
    return M


def sym(M):
    return 0.5 * (M + np.swapaxes(M, -1, -2))


def skew(M):
    return 0.5 * (M - np.swapaxes(M, -1, -2))


def frob(M):
    return float(np.linalg.norm(M))


def standard_symplectic(n):
    """Block-diagonal form with consecutive [[0, 1], [-1, 0]] blocks."""
    if n < 2 or n % 2:
        raise InvalidInputError(f"dimension must be even and >= 2, got {n}")
    return np.kron(np.eye(n // 2), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def expm(M):
    """Matrix exponential (scaling and squaring with Pade approximants)."""
    M = as_square(M, "M", even=False)
    return scipy.linalg.expm(M)


def _spd_eig(S, name):
    S = as_square(S, name, even=False)
    scale = max(frob(S), 1.0)
    if frob(S - S.T) > TOL.structure * scale:
        raise DegenerateInputError(f"{name} is not symmetric")
    w, Q = np.linalg.eigh(sym(S))
    if w[0] <= TOL.spd_floor:
        raise DegenerateInputError(
            f"{name} is not positive definite (min eigenvalue {w[0]:.3e})"
        )
    return w, Q


def sqrtm_spd(S):
    """Unique SPD square root of a symmetric positive definite matrix."""
    w, Q = _spd_eig(S, "S")
    return (Q * np.sqrt(w)) @ Q.T


def inv_sqrtm_spd(S):
    """Inverse of :func:`sqrtm_spd`, computed from the same eigenbasis."""
    w, Q = _spd_eig(S, "S")
    return (Q / np.sqrt(w)) @ Q.T


def pfaffian(Omega):
    """
    Pfaffian of a real skew-symmetric matrix.

    Uses Parlett-Reid elimination with partial pivoting, O(n^3). Sign
    convention: expansion along the first row, so the standard symplectic
    form has Pfaffian +1.

    Parameters
    ----------
    Omega : (n, n) array_like
        Skew-symmetric within ``TOL.structure`` (relative to its norm).

    Returns
    -------
    float
        Pf(Omega); its square equals det(Omega). Returns 0.0 for odd n.
    """
    A = as_square(Omega, "Omega", even=False)
    n = A.shape[0]
    if frob(A + A.T) > TOL.structure * max(frob(A), 1.0):
        raise InvalidInputError("Omega is not skew-symmetric")
    if n % 2:
        return 0.0
    A = skew(A).copy()
    pf = 1.0
    for k in range(0, n - 1, 2):
        kp = k + 1 + int(np.argmax(np.abs(A[k + 1:, k])))
        if kp != k + 1:
            A[[k + 1, kp], :] = A[[kp, k + 1], :]
            A[:, [k + 1, kp]] = A[:, [kp, k + 1]]
            pf = -pf
        if A[k + 1, k] == 0.0:
            return 0.0
        pf *= A[k, k + 1]
        if k + 2 < n:
            tau = A[k, k + 2:] / A[k, k + 1]
            col = A[k + 2:, k + 1].copy()
            A[k + 2:, k + 2:] += np.outer(tau, col) - np.outer(col, tau)
    return float(pf)


def _split(J, M):
    JMJ = J @ M @ J
    return 0.5 * (M - JMJ), 0.5 * (M + JMJ)


def comm_split(J, M):
    """
    Split ``M`` into parts commuting and anticommuting with ``J``.

    Returns ``(M_c, M_a)`` with ``M_c = (M - JMJ)/2`` and
    ``M_a = (M + JMJ)/2``. Requires J @ J = -I.
    """
    J = as_square(J, "J")
    M = as_square(M, "M")
    if J.shape != M.shape:
        raise InvalidInputError("J and M must have the same shape")
    if frob(J @ J + np.eye(J.shape[0])) > TOL.structure * max(1.0, frob(J)):
        raise InvalidInputError("J is not an almost complex structure (J^2 != -I)")
    return _split(J, M)
