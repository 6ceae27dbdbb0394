"""
Invariant suite run by ``hermflow verify``.

Every check draws its own seeded samples, measures a worst-case residual
and compares it with a threshold. Thresholds can be overridden by name.
"""

import numpy as np

from . import geodesic as geo
from .fiber import canonical_compatible, pullback, random_frame, random_pair, standard_pair
from .field import global_energy
from .matrix_kernel import comm_split, expm, frob, pfaffian, skew, sqrtm_spd, sym
from .tangent import (
    fiber_inner,
    project_normal,
    project_tangent,
    random_ambient,
    random_tangent,
    split4,
)
from .variational import (
    DiscreteCurve,
    curve_from_trajectory,
    energy_curve,
    energy_scale,
    equivalence_residual,
    first_variation_fd,
    frame_energy,
    make_jet,
    phi_push,
    velocity_from_frame,
)


def _pairs(rng, dim, count, spread=0.4):
    for _ in range(count):
        yield pullback(standard_pair(dim), random_frame(rng, dim, spread))


def _rel(a, b):
    return frob(a - b) / max(1.0, frob(b))


def check_expm_inverse(rng, dim, samples):
    worst = 0.0
    for _ in range(samples):
        M = rng.uniform(-1, 1, (dim, dim))
        M *= rng.uniform(0, 2) / np.linalg.norm(M, 2)
        worst = max(worst, frob(expm(M) @ expm(-M) - np.eye(dim)))
    return worst


def check_pfaffian_det(rng, dim, samples):
    worst = 0.0
    for _ in range(samples):
        O = skew(rng.standard_normal((dim, dim)))
        d = np.linalg.det(O)
        worst = max(worst, abs(pfaffian(O) ** 2 - d) / max(abs(d), 1e-300))
    return worst


def check_comm_split(rng, dim, samples):
    worst = 0.0
    for p in _pairs(rng, dim, samples):
        Mc, Ma = comm_split(p.j, rng.standard_normal((dim, dim)))
        Nc, Na = comm_split(p.j, rng.standard_normal((dim, dim)))
        Mcc, Mca = comm_split(p.j, Mc)
        worst = max(worst, abs(np.trace(Mc @ Na)), abs(np.trace(Nc @ Ma)),
                    _rel(Mcc, Mc), frob(Mca))
    return worst


def check_sqrtm(rng, dim, samples):
    worst = 0.0
    for _ in range(samples):
        B = rng.standard_normal((dim, dim))
        S = B @ B.T + 0.1 * np.eye(dim)
        R = sqrtm_spd(S)
        worst = max(worst, _rel(R @ R, S), _rel(R @ S, S @ R), frob(R - R.T))
    return worst


def check_j_isometry(rng, dim, samples):
    worst = 0.0
    for p in _pairs(rng, dim, samples):
        worst = max(worst, _rel(p.j.T @ p.g @ p.j, p.g), abs(np.linalg.det(p.j) - 1))
    return worst


def check_canonical_idempotent(rng, dim, samples):
    worst = 0.0
    for p in _pairs(rng, dim, samples):
        noisy = p.omega + 1e-3 * skew(rng.standard_normal((dim, dim)))
        q1 = canonical_compatible(p.g, noisy)
        q2 = canonical_compatible(q1.g, q1.omega)
        worst = max(worst, _rel(q2.omega, q1.omega))
    return worst


def check_generation_associativity(rng, dim, samples):
    worst = 0.0
    std = standard_pair(dim)
    for _ in range(samples):
        f1 = random_frame(rng, dim, 0.3)
        f2 = random_frame(rng, dim, 0.3)
        a = pullback(std, f1 @ f2)
        b = pullback(pullback(std, f1), f2)
        worst = max(worst, _rel(a.g, b.g), _rel(a.omega, b.omega))
    return worst


def check_volume(rng, dim, samples):
    worst = 0.0
    for i in range(samples):
        p, _ = random_pair(int(rng.integers(2**31)), dim, 0.4)
        dg, dw = np.linalg.det(p.g), np.linalg.det(p.omega)
        worst = max(worst, abs(dg - dw) / dg, abs(pfaffian(p.omega) ** 2 - dw) / dw)
    return worst


def check_projectors(rng, dim, samples):
    worst = 0.0
    for p in _pairs(rng, dim, samples):
        u = random_ambient(p, rng)
        v = random_ambient(p, rng)
        Tu = project_tangent(u)
        TTu = project_tangent(Tu)
        Nu = project_normal(u)
        TNu = project_tangent(Nu)
        s = u.norm()
        worst = max(
            worst,
            (TTu - Tu).norm() / s,
            (Tu + Nu - u).norm() / s,
            TNu.norm() / s,
            abs(fiber_inner(Tu, project_normal(v))) / (s * v.norm()),
        )
    return worst


def check_trace_identity(rng, dim, samples):
    worst = 0.0
    for p in _pairs(rng, dim, samples):
        t = project_tangent(random_ambient(p, rng))
        worst = max(worst, abs(np.trace(t.h_cap) - np.trace(t.a_cap)) / max(1.0, t.norm()))
    return worst


def check_split4(rng, dim, samples):
    worst = 0.0
    for p in _pairs(rng, dim, samples):
        t = random_ambient(p, rng)
        parts = list(split4(t))
        total = parts[0] + parts[1] + parts[2] + parts[3]
        worst = max(worst, (total - t).norm() / t.norm())
        for i in range(4):
            for k in range(i + 1, 4):
                worst = max(worst, abs(fiber_inner(parts[i], parts[k])) / t.norm() ** 2)
    return worst


def _random_state(rng, dim, scale=0.5):
    p = next(_pairs(rng, dim, 1, spread=0.3))
    t = random_tangent(p, rng, scale)
    return geo.GeodesicState(p, t.h_cap, t.a_cap)


def check_rhs_oracle(rng, dim, samples):
    worst = 0.0
    for _ in range(samples):
        s = _random_state(rng, dim)
        U, V = geo.geodesic_rhs(s)
        U2, V2 = geo.rhs_oracle_lsq(s)
        e1, e2 = geo.projected_residual(s, U, V)
        worst = max(worst, frob(U - U2), frob(V - V2), frob(e1), frob(e2))
    return worst


def _random_init(rng, dim, scale=0.5):
    s = _random_state(rng, dim, scale)
    return geo.make_initial(s.pair, s.x_vel, s.w_vel)


def check_observables(rng, dim, samples, dt=1e-3):
    worst = 0.0
    for _ in range(samples):
        init = _random_init(rng, dim)
        m = geo.integrate(init, 1.0, dt).monitors
        worst = max(
            worst,
            np.max(np.abs(m["p_num"] - m["p_pred"])),
            np.max(np.abs(m["trX_num"] - m["trX_pred"])),
            np.max(m["xw_dev"]),
            np.max(np.abs(m["trX_num"] - m["trW_num"])),
        )
    return float(worst)


def check_conservation(rng, dim, samples, dt=1e-3):
    worst = 0.0
    for _ in range(samples):
        init = _random_init(rng, dim)
        m = geo.integrate(init, 1.0, dt).monitors
        worst = max(worst, float(np.max(np.abs(m["I1"] - init.C)) / abs(init.C)))
    return worst


def check_drift(rng, dim, samples, dt=1e-3):
    worst = 0.0
    for _ in range(samples):
        worst = max(worst, geo.integrate(_random_init(rng, dim), 1.0, dt).max_drift())
    return worst


def check_time_reversal(rng, dim, samples, dt=1e-3):
    worst = 0.0
    for _ in range(samples):
        init = _random_init(rng, dim)
        tr = geo.integrate(init, 1.0, dt)
        back = geo.InitialData(geo.HermitianPair.unchecked(tr.g[-1], tr.omega[-1]), -tr.x[-1], -tr.w[-1])
        tb = geo.integrate(back, 1.0, dt)
        worst = max(worst, _rel(tb.g[-1], init.pair0.g), _rel(tb.omega[-1], init.pair0.omega))
    return worst


def check_equivariance(rng, dim, samples, dt=1e-2):
    worst = 0.0
    for _ in range(samples):
        init = _random_init(rng, dim)
        L = random_frame(rng, dim, 0.3)
        Li = np.linalg.inv(L)
        moved = geo.InitialData(pullback(init.pair0, L), Li @ init.h0 @ L, Li @ init.a0 @ L)
        a = geo.integrate(init, 1.0, dt)
        b = geo.integrate(moved, 1.0, dt)
        worst = max(worst, _rel(b.g[-1], L.T @ a.g[-1] @ L), _rel(b.omega[-1], L.T @ a.omega[-1] @ L))
    return worst


def check_rk4_order(rng, dim, samples):
    p = pullback(standard_pair(dim), random_frame(rng, dim, 0.3))
    init = geo.make_initial(p, np.eye(dim), np.eye(dim))
    exact = geo.conformal_geodesic(p, 1.0, 1.0).pair.g
    errs = [frob(geo.integrate(init, 1.0, dt).g[-1] - exact) for dt in (0.2, 0.1)]
    return abs(errs[0] / errs[1] - 16.0)


def check_fixed_omega_contrast(rng, dim, samples):
    # returns 1 / separation so that "small is good" like the other checks
    p = standard_pair(dim)
    h = sym(rng.standard_normal((dim, dim)))
    _, Ha = comm_split(p.j, h)
    init = geo.make_initial(p, Ha, np.zeros((dim, dim)))
    tr = geo.integrate(init, 1.0, 1e-2)
    curve = geo.fixed_omega_geodesic(p.g, p.g @ Ha, 1.0)
    return 1.0 / frob(tr.g[-1] - curve)


def check_phi_functoriality(rng, dim, samples):
    worst = 0.0
    for p in _pairs(rng, dim, samples):
        f1 = random_frame(rng, dim, 0.3)
        f2 = random_frame(rng, dim, 0.3)
        a = phi_push(make_jet(p, f1 @ f2))
        b = phi_push(make_jet(phi_push(make_jet(p, f1)), f2))
        worst = max(worst, _rel(a.g, b.g), _rel(a.omega, b.omega))
    return worst


def check_velocity_fd(rng, dim, samples, h=1e-4):
    worst = 0.0
    for p in _pairs(rng, dim, samples):
        F0 = random_frame(rng, dim, 0.3)
        F1 = rng.standard_normal((dim, dim))
        F2 = rng.standard_normal((dim, dim))

        def at(t):
            return pullback(p, F0 + t * F1 + t * t * F2, validate=False)

        X, W, _ = velocity_from_frame(make_jet(p, F0, F1, 2 * F2))
        gp, gm = at(h), at(-h)
        worst = max(worst,
                    _rel(F0.T @ p.g @ F0 @ X, (gp.g - gm.g) / (2 * h)),
                    _rel(F0.T @ p.omega @ F0 @ W, (gp.omega - gm.omega) / (2 * h)))
    return worst


def _kappas(rng, dim, samples):
    out = []
    for p in _pairs(rng, dim, samples):
        f = random_frame(rng, dim, 0.3)
        jet = make_jet(p, f, rng.standard_normal((dim, dim)), rng.standard_normal((dim, dim)))
        lhs, rhs = equivalence_residual(jet)
        out.append((np.sum(lhs * rhs) / np.sum(rhs * rhs), frob(lhs), frob(rhs)))
    return out


def check_kappa(rng, dim, samples):
    ks = np.array([k for k, _, _ in _kappas(rng, dim, samples)])
    return float(np.ptp(ks) / abs(np.mean(ks)))


def check_conformal_frame(rng, dim, samples):
    worst = 0.0
    for p in _pairs(rng, dim, samples):
        c0 = rng.uniform(0.2, 1.0)
        for t in (0.0, 0.5, 1.0):
            base = 1 + dim * c0 * t / 4
            e = 2.0 / dim
            f = base**e * np.eye(dim)
            ft = e * base ** (e - 1) * dim * c0 / 4 * np.eye(dim)
            ftt = e * (e - 1) * base ** (e - 2) * (dim * c0 / 4) ** 2 * np.eye(dim)
            lhs, rhs = equivalence_residual(make_jet(p, f, ft, ftt))
            worst = max(worst, frob(lhs), frob(rhs))
    return worst


def check_frame_energy(rng, dim, samples):
    worst = 0.0
    ts = np.linspace(0.0, 1.0, 101)
    for p in _pairs(rng, dim, samples):
        F0 = random_frame(rng, dim, 0.2)
        B = 0.5 * rng.standard_normal((dim, dim))
        f = np.array([F0 @ expm(t * B) for t in ts])
        ft = f @ B
        e2 = frame_energy(p, ts, f, ft)
        e1 = energy_curve(DiscreteCurve.from_frames(p, ts, f, ft))
        # reference volume of the frame route is det(f) relative to f(0)
        worst = max(worst, abs(e1 * np.linalg.det(F0) - e2) / max(abs(e2), 1e-12))
    return worst


def check_criticality(rng, dim, samples, dt=1e-3):
    worst = 0.0
    for _ in range(max(1, samples)):
        init = _random_init(rng, dim)
        tr = geo.integrate(init, 1.0, dt)
        curve = curve_from_trajectory(tr)
        val = first_variation_fd(curve, int(rng.integers(2**31)))
        worst = max(worst, val / energy_scale(curve))
    return worst


def check_global_energy(rng, dim, samples, dt=1e-3):
    inits = [_random_init(rng, dim) for _ in range(max(1, samples))]
    trajs = [geo.integrate(i, 1.0, dt) for i in inits]
    w = rng.uniform(0.5, 2.0, len(inits))
    e = global_energy(trajs, w)
    expected = float(sum(wi * i.C for wi, i in zip(w, inits)))
    return abs(e - expected) / max(1.0, abs(expected))


# name -> (function, default threshold, sample count)
CHECKS = {
    "expm_inverse": (check_expm_inverse, 1e-11, 200),
    "pfaffian_det": (check_pfaffian_det, 1e-9, 200),
    "comm_split_projection": (check_comm_split, 1e-10, 200),
    "sqrtm_spd": (check_sqrtm, 1e-10, 200),
    "j_isometry": (check_j_isometry, 1e-9, 200),
    "canonical_idempotent": (check_canonical_idempotent, 1e-10, 100),
    "generation_associativity": (check_generation_associativity, 1e-10, 100),
    "volume_identity": (check_volume, 1e-9, 100),
    "projector_algebra": (check_projectors, 1e-9, 200),
    "tangency_trace": (check_trace_identity, 1e-10, 200),
    "split4_orthogonal": (check_split4, 1e-10, 200),
    "rhs_oracle": (check_rhs_oracle, 1e-9, 100),
    "closed_form_observables": (check_observables, 1e-6, 2),
    "energy_density_conservation": (check_conservation, 1e-8, 2),
    "constraint_drift": (check_drift, 1e-8, 2),
    "time_reversal": (check_time_reversal, 1e-7, 1),
    "gl_equivariance": (check_equivariance, 1e-8, 2),
    "rk4_order": (check_rk4_order, 2.0, 1),
    "fixed_omega_contrast": (check_fixed_omega_contrast, 1e3, 1),
    "phi_functoriality": (check_phi_functoriality, 1e-12, 100),
    "velocity_fd": (check_velocity_fd, 1e-6, 50),
    "kappa_spread": (check_kappa, 1e-8, 100),
    "conformal_frame_zero": (check_conformal_frame, 1e-10, 20),
    "frame_energy_agreement": (check_frame_energy, 1e-10, 20),
    "criticality": (check_criticality, 1e-5, 1),
    "global_energy": (check_global_energy, 1e-7, 2),
}


def run_checks(dim=4, seed=0, overrides=None, names=None):
    """Run the suite; returns a list of result dicts, one per check."""
    overrides = overrides or {}
    unknown = set(overrides) - set(CHECKS)
    if unknown:
        raise KeyError(f"unknown check names: {sorted(unknown)}")
    results = []
    for i, (name, (fn, threshold, samples)) in enumerate(CHECKS.items()):
        if names is not None and name not in names:
            continue
        threshold = float(overrides.get(name, threshold))
        rng = np.random.default_rng([seed, i])
        try:
            value = float(fn(rng, dim, samples))
            status = "pass" if value <= threshold else "fail"
            err = None
        except Exception as exc:
            value, status, err = None, "error", f"{type(exc).__name__}: {exc}"
        rec = {"name": name, "status": status, "residual": value, "threshold": threshold}
        if err:
            rec["error"] = err
        results.append(rec)
    return results
