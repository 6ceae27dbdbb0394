"""
Compatible pairs on a single fiber
==================================

A fiber point is a metric g together with a 2-form omega such that
J = g^-1 omega squares to -I. Every such pair is the pullback of the
standard one by some invertible frame.
"""

import numpy as np

from hermflow.fiber import make_pair, random_pair, standard_pair, vol_density
from hermflow.matrix_kernel import pfaffian
from hermflow.tangent import fiber_inner, project_tangent, random_ambient, split4

np.set_printoptions(precision=4, suppress=True)

# the standard structure: identity metric, 2x2 symplectic blocks
std = standard_pair(4)
print("standard omega:\n", std.omega)

# a seeded random pair, and the frame it came from
pair, frame = random_pair(seed=1, n=4, spread=0.4)
print("J^2 + I =", np.linalg.norm(pair.j @ pair.j + np.eye(4)))

# volume forms agree: sqrt(det g) equals |Pf(omega)|
print("vol_g, vol_omega =", vol_density(pair))
print("Pf^2 - det:", pfaffian(pair.omega) ** 2 - np.linalg.det(pair.omega))

# validation names the first invariant that fails
try:
    make_pair(np.diag([4.0, 1.0]), np.array([[0.0, 1.0], [-1.0, 0.0]]))
except ValueError as exc:
    print("rejected:", exc)

###############################################################################
# Tangent vectors
# ---------------
# Perturbations (h, alpha) are stored right-translated as H = g^-1 h,
# A = omega^-1 alpha. Of the four orthogonal pieces of an ambient vector,
# three are tangent to the compatible pairs; the fourth changes g and
# omega in opposite Hermitian directions and is normal.

rng = np.random.default_rng(0)
u = random_ambient(pair, rng)
n1, n2, n3, n4 = split4(u)
t = project_tangent(u)
print("|(n1 + n2 + n3) - Pr^T u| =", (n1 + n2 + n3 - t).norm())
print("<n3, n4> =", fiber_inner(n3, n4))
print("tr H - tr A on the tangent part:", np.trace(t.h_cap) - np.trace(t.a_cap))
