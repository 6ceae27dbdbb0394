"""
The conformal geodesic
======================

Starting at the standard 2-dimensional fiber with H = A = I, both g and
omega grow by the same factor. The volume ratio p(t) = det(g0^-1 g)^1/2
is the quadratic (n/32) C t^2 + (tr H / 2) t + 1, so p(1) = 9/4 here.
"""

import numpy as np

from hermflow import geodesic as geo
from hermflow.fiber import standard_pair

pair = standard_pair(2)
init = geo.make_initial(pair, np.eye(2), np.eye(2))
print("C =", init.C, " tr H =", init.trH)

traj = geo.integrate(init, t_end=1.0, dt=1e-3)
m = traj.monitors
for k in (0, 250, 500, 750, 1000):
    exact = geo.conformal_geodesic(pair, 1.0, traj.times[k])
    err = np.linalg.norm(traj.g[k] - exact.pair.g)
    print(f"t={traj.times[k]:.2f}  p={m['p_num'][k]:.12f}  p_pred={m['p_pred'][k]:.12f}  "
          f"trX={m['trX_num'][k]:.12f}  |g - closed form|={err:.1e}")

# the velocity decays like c0 / (1 + n c0 t / 4)
print("X(1) =", traj.x[-1].diagonal(), " expected", 2 / 3)

# halving dt cuts the endpoint error by about 16
errs = []
for dt in (0.1, 0.05, 0.025):
    g1 = geo.integrate(init, 1.0, dt).g[-1]
    errs.append(np.linalg.norm(g1 - 2.25 * np.eye(2)))
print("error ratios:", errs[0] / errs[1], errs[1] / errs[2])
