"""
Energy and its first variation
==============================

The energy of a curve of pairs is the time integral of
(tr X^2 + tr W^2) det(g0^-1 g)^1/2. Geodesics are its critical points:
a fixed-endpoint variation changes the discrete energy only at the level
of discretization error, while a non-geodesic curve responds at first
order.
"""

import numpy as np

from hermflow import geodesic as geo
from hermflow.fiber import random_frame, random_pair, standard_pair
from hermflow.tangent import random_tangent
from hermflow.variational import (
    DiscreteCurve,
    curve_from_trajectory,
    energy_curve,
    energy_scale,
    equivalence_residual,
    first_variation_fd,
    make_jet,
)

rng = np.random.default_rng(4)
pair, _ = random_pair(4, 4, 0.3)
init = geo.make_initial(pair, random_tangent(pair, rng, 0.5))
curve = curve_from_trajectory(geo.integrate(init, 1.0, 1e-3))
scale = energy_scale(curve)
print("energy", energy_curve(curve), " C =", init.C)
print("geodesic probes / scale:", [f"{first_variation_fd(curve, s) / scale:.1e}" for s in range(3)])

# the conformal curve with the wrong growth exponent
t = curve.times
p4 = standard_pair(4)
phi = (1 + t) ** 2.0
bad = DiscreteCurve(t, phi[:, None, None] * p4.g, phi[:, None, None] * p4.omega)
print("wrong-exponent probes / scale:",
      [f"{first_variation_fd(bad, s) / energy_scale(bad):.1e}" for s in range(3)])

###############################################################################
# Written in a frame f (pair = f^T pair0 f), the Euler-Lagrange expression E
# is a fixed multiple of the sum-rule residual of the geodesic equation.
# The multiple is measured here, not assumed.

ks = []
for _ in range(20):
    jet = make_jet(pair, random_frame(rng, 4, 0.3), rng.standard_normal((4, 4)), rng.standard_normal((4, 4)))
    lhs, rhs = equivalence_residual(jet)
    ks.append(np.sum(lhs * rhs) / np.sum(rhs * rhs))
print("kappa: mean %.12f  spread %.1e" % (np.mean(ks), np.ptp(ks)))
