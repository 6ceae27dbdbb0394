"""
Conserved quantities along random geodesics
===========================================

For any tangent initial velocity the energy density
(tr X^2 + tr W^2) p stays equal to C = tr H^2 + tr A^2, and p, tr X and
X + W follow closed forms in t. The integrator only measures the
constraint drift unless retraction is switched on.
"""

import numpy as np

from hermflow import geodesic as geo
from hermflow.fiber import random_pair, standard_pair
from hermflow.matrix_kernel import comm_split, skew, sym
from hermflow.tangent import random_tangent

rng = np.random.default_rng(3)
for n in (2, 4, 6):
    pair, _ = random_pair(int(rng.integers(1 << 31)), n, 0.3)
    init = geo.make_initial(pair, random_tangent(pair, rng, 0.7))
    traj = geo.integrate(init, 1.0, 1e-3)
    m = traj.monitors
    print(f"n={n}: C={init.C:+.4f}"
          f"  max|I1 - C|/|C|={np.max(np.abs(m['I1'] - init.C)) / abs(init.C):.1e}"
          f"  max|p - p_pred|={np.max(np.abs(m['p_num'] - m['p_pred'])):.1e}"
          f"  max|X+W - pred|={np.max(m['xw_dev']):.1e}"
          f"  drift={traj.max_drift():.1e}")

# C can be negative: along pure 2-form directions that anticommute with J,
# tr A^2 <= 0, so the product metric is indefinite
p = standard_pair(4)
A0 = comm_split(p.j, np.linalg.solve(p.omega, skew(rng.standard_normal((4, 4)))))[1]
init = geo.make_initial(p, np.zeros((4, 4)), A0)
m = geo.integrate(init, 1.0, 1e-3).monitors
print(f"2-form direction: C={init.C:+.4f}, I1 range [{m['I1'].min():+.6f}, {m['I1'].max():+.6f}]")

###############################################################################
# A curve that is geodesic for fixed omega is not geodesic here.
# Both start with the same velocity; they separate at first order in the
# acceleration, which carries the term tr(H0^2)/4 * I.

H0 = comm_split(p.j, sym(rng.standard_normal((4, 4))))[1]
H0 *= 0.8 / np.linalg.norm(H0)
tr = geo.integrate(geo.make_initial(p, H0, np.zeros((4, 4))), 1.0, 1e-3)
for t in (0.25, 0.5, 1.0):
    k = int(round(t * 1000))
    print(f"t={t}: |g_geodesic - g exp(t H0)| =",
          np.linalg.norm(tr.g[k] - geo.fixed_omega_geodesic(p.g, p.g @ H0, t)))
