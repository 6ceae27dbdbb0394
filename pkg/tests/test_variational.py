import numpy as np
import pytest
from scipy.integrate import simpson

from hermflow import geodesic as geo
from hermflow.errors import DegenerateInputError, InvalidInputError
from hermflow.fiber import compatibility_residual, pullback, random_frame, standard_pair
from hermflow.matrix_kernel import expm
from hermflow.variational import (
    DiscreteCurve,
    FrameJet,
    criticality_probe,
    curve_from_trajectory,
    energy_curve,
    energy_scale,
    equivalence_residual,
    first_variation_fd,
    first_variation_integrand,
    frame_energy,
    frame_geodesic,
    make_jet,
    phi_push,
    velocity_from_frame,
    velocity_rates,
)

from conftest import rand_init, rand_pair


def random_jet(rng, n):
    p = rand_pair(rng, n)
    return make_jet(p, random_frame(rng, n, 0.3), rng.standard_normal((n, n)),
                    rng.standard_normal((n, n)))


def conformal_curve(n, times, exponent):
    # phi(t) = (1 + n t / 4)^exponent; exponent 4/n is the geodesic
    p = standard_pair(n)
    phi = (1 + n * times / 4) ** exponent
    return DiscreteCurve(times, phi[:, None, None] * p.g, phi[:, None, None] * p.omega)


class TestPhi:
    def test_identity(self, rng):
        p = rand_pair(rng, 4)
        q = phi_push(make_jet(p, np.eye(4)))
        np.testing.assert_allclose(q.g, p.g)
        np.testing.assert_allclose(q.omega, p.omega)

    def test_diag(self):
        q = phi_push(make_jet(standard_pair(2), np.diag([2.0, 1.0])))
        np.testing.assert_allclose(q.g, np.diag([4.0, 1.0]))
        np.testing.assert_allclose(q.omega, [[0, 2], [-2, 0]])

    def test_compatible(self, rng):
        for _ in range(20):
            j = random_jet(rng, 4)
            q = phi_push(j)
            assert np.linalg.norm(compatibility_residual(q.g, q.omega)) <= 1e-12

    def test_functorial(self, rng):
        p = rand_pair(rng, 4)
        f1, f2 = random_frame(rng, 4, 0.3), random_frame(rng, 4, 0.3)
        a = phi_push(make_jet(p, f1 @ f2))
        b = phi_push(make_jet(phi_push(make_jet(p, f1)), f2))
        np.testing.assert_allclose(a.g, b.g, atol=1e-12)
        np.testing.assert_allclose(a.omega, b.omega, atol=1e-12)

    def test_singular_frame(self):
        with pytest.raises(DegenerateInputError):
            make_jet(standard_pair(2), np.diag([1.0, 0.0]))


class TestVelocity:
    def test_exponential_frame(self):
        X, W, J = velocity_from_frame(make_jet(standard_pair(2), np.eye(2), np.eye(2) / 2))
        np.testing.assert_allclose(X, np.eye(2))
        np.testing.assert_allclose(W, np.eye(2))

    def test_static(self, rng):
        X, W, _ = velocity_from_frame(make_jet(rand_pair(rng, 4), random_frame(rng, 4, 0.3)))
        assert np.all(X == 0) and np.all(W == 0)

    def test_finite_differences(self, rng):
        h = 1e-4
        for _ in range(20):
            p = rand_pair(rng, 4)
            F0, F1, F2 = random_frame(rng, 4, 0.3), rng.standard_normal((4, 4)), rng.standard_normal((4, 4))
            at = lambda t: pullback(p, F0 + t * F1 + t * t * F2, validate=False)  # noqa: E731
            X, W, _ = velocity_from_frame(make_jet(p, F0, F1, 2 * F2))
            g0 = F0.T @ p.g @ F0
            w0 = F0.T @ p.omega @ F0
            np.testing.assert_allclose(g0 @ X, (at(h).g - at(-h).g) / (2 * h), atol=1e-6)
            np.testing.assert_allclose(w0 @ W, (at(h).omega - at(-h).omega) / (2 * h), atol=1e-6)

    def test_rates_finite_differences(self, rng):
        h = 1e-5
        p = rand_pair(rng, 4)
        F0, F1, F2, F3 = (rng.standard_normal((4, 4)) for _ in range(4))
        F0 = random_frame(rng, 4, 0.3)

        def jet(t):
            return make_jet(p, F0 + t * F1 + t**2 * F2 + t**3 * F3, F1 + 2 * t * F2 + 3 * t**2 * F3,
                            2 * F2 + 6 * t * F3)

        Xt, Wt = velocity_rates(jet(0.0))
        Xp, Wp, _ = velocity_from_frame(jet(h))
        Xm, Wm, _ = velocity_from_frame(jet(-h))
        np.testing.assert_allclose(Xt, (Xp - Xm) / (2 * h), atol=1e-6)
        np.testing.assert_allclose(Wt, (Wp - Wm) / (2 * h), atol=1e-6)


class TestIntegrand:
    def test_static(self, rng):
        p = rand_pair(rng, 4)
        assert np.all(first_variation_integrand(make_jet(p, np.eye(4))) == 0)

    def test_conformal_frame(self):
        E = first_variation_integrand(make_jet(standard_pair(2), np.eye(2), np.eye(2) / 2))
        np.testing.assert_allclose(E, 0, atol=1e-14)

    def test_gradient_of_energy(self, rng):
        # dE/ds = 2 * int tr(E f_s f^-1) det(f) dt along a fixed-endpoint variation
        n = 4
        p = rand_pair(rng, n)
        F0 = random_frame(rng, n, 0.2)
        F1 = 0.3 * rng.standard_normal((n, n))
        F2 = 0.3 * rng.standard_normal((n, n))
        C = rng.standard_normal((n, n))
        t = np.linspace(0.0, 1.0, 2001)
        psi = np.sin(np.pi * t) ** 2
        dpsi = np.pi * np.sin(2 * np.pi * t)
        f = F0 + t[:, None, None] * F1 + (t**2)[:, None, None] * F2
        ft = F1 + 2 * t[:, None, None] * F2

        def energy(s):
            return frame_energy(p, t, f + s * psi[:, None, None] * C, ft + s * dpsi[:, None, None] * C)

        eps = 1e-5
        fd = (energy(eps) - energy(-eps)) / (2 * eps)
        dens = np.array([
            np.trace(first_variation_integrand(FrameJet(f[k], ft[k], 2 * F2, p)) @ (psi[k] * C)
                     @ np.linalg.inv(f[k])) * np.linalg.det(f[k])
            for k in range(len(t))
        ])
        analytic = 2 * simpson(dens, x=t)
        assert fd == pytest.approx(analytic, rel=1e-5)


class TestEquivalence:
    def test_static(self, rng):
        lhs, rhs = equivalence_residual(make_jet(rand_pair(rng, 4), random_frame(rng, 4, 0.3)))
        np.testing.assert_allclose(lhs, 0, atol=1e-15)
        np.testing.assert_allclose(rhs, 0, atol=1e-15)

    def test_constant_ratio(self, rng):
        j = random_jet(rng, 4)
        lhs, rhs = equivalence_residual(j)
        i = np.unravel_index(np.argmax(np.abs(rhs)), rhs.shape)
        kappa = lhs[i] / rhs[i]
        ks = []
        for _ in range(100):
            lhs, rhs = equivalence_residual(random_jet(rng, int(rng.choice([2, 4, 6]))))
            ks.append(np.sum(lhs * rhs) / np.sum(rhs * rhs))
            assert np.linalg.norm(lhs - kappa * rhs) <= 1e-8 * np.linalg.norm(lhs)
        ks = np.array(ks)
        assert np.ptp(ks) / abs(ks.mean()) <= 1e-8
        assert kappa == pytest.approx(-2.0, rel=1e-10)

    def test_conformal_frames(self, rng):
        for n in (2, 4, 6):
            p = rand_pair(rng, n)
            for t in (0.0, 0.5, 1.0):
                e = 2.0 / n
                base = 1 + n * t / 4
                f = base**e * np.eye(n)
                ft = e * base ** (e - 1) * n / 4 * np.eye(n)
                ftt = e * (e - 1) * base ** (e - 2) * (n / 4) ** 2 * np.eye(n)
                lhs, rhs = equivalence_residual(make_jet(p, f, ft, ftt))
                assert np.linalg.norm(lhs) <= 1e-10
                assert np.linalg.norm(rhs) <= 1e-10


class TestFrameGeodesic:
    def test_matches_integrator(self, rng):
        p = rand_pair(rng, 4)
        B = 0.4 * rng.standard_normal((4, 4))
        times, F, Ft = frame_geodesic(p, B, 1.0, 1e-2)
        X0, W0, _ = velocity_from_frame(make_jet(p, np.eye(4), B))
        tr = geo.integrate(geo.make_initial(p, X0, W0), 1.0, 1e-2)
        for k in (len(times) // 2, -1):
            q = phi_push(make_jet(p, F[k]))
            np.testing.assert_allclose(q.g, tr.g[k], atol=1e-7)
            np.testing.assert_allclose(q.omega, tr.omega[k], atol=1e-7)


class TestEnergy:
    def test_constant_curve(self, rng):
        p = rand_pair(rng, 4)
        t = np.linspace(0, 1, 11)
        c = DiscreteCurve(t, np.repeat(p.g[None], 11, 0), np.repeat(p.omega[None], 11, 0))
        assert energy_curve(c) <= 1e-25

    def test_conformal_geodesic(self):
        t = np.linspace(0, 1, 1001)
        assert energy_curve(conformal_curve(2, t, 2.0)) == pytest.approx(4.0, rel=1e-8)

    def test_weights(self):
        t = np.linspace(0, 1, 201)
        c = conformal_curve(2, t, 2.0)
        assert energy_curve([c, c], [0.5, 0.5]) == pytest.approx(energy_curve(c), rel=1e-15)
        with pytest.raises(InvalidInputError):
            energy_curve([c], [1.0, 2.0])

    def test_quadrature_refinement(self, rng):
        # frame curves carry exact velocities, so only the quadrature rule differs
        p = rand_pair(rng, 4)
        F0 = random_frame(rng, 4, 0.2)
        B1 = 0.5 * rng.standard_normal((4, 4))
        B2 = 0.5 * rng.standard_normal((4, 4))

        def curve(k, rule):
            t = np.linspace(0, 1, k)
            f = np.array([F0 @ expm(s * B1 + s * s * B2) for s in t])
            h = 1e-6
            ft = np.array([(F0 @ expm((s + h) * B1 + (s + h) ** 2 * B2)
                            - F0 @ expm((s - h) * B1 + (s - h) ** 2 * B2)) / (2 * h) for s in t])
            c = DiscreteCurve.from_frames(p, t, f, ft, rule)
            return c

        exact = energy_curve(curve(2001, "simpson"))
        errs = {r: [abs(energy_curve(curve(k, r)) - exact) for k in (11, 21, 41)]
                for r in ("trapezoid", "simpson")}
        for e in errs.values():
            assert e[0] > e[1] > e[2]
        assert errs["simpson"][-1] < errs["trapezoid"][-1]

    def test_frame_route_agrees(self, rng):
        p = rand_pair(rng, 4)
        F0 = random_frame(rng, 4, 0.2)
        B = 0.5 * rng.standard_normal((4, 4))
        t = np.linspace(0, 1, 101)
        f = np.array([F0 @ expm(s * B) for s in t])
        ft = f @ B
        e_frame = frame_energy(p, t, f, ft)
        e_curve = energy_curve(DiscreteCurve.from_frames(p, t, f, ft))
        assert e_curve * np.linalg.det(F0) == pytest.approx(e_frame, rel=1e-10)

    def test_frame_energy_rejects_orientation_flip(self):
        p = standard_pair(2)
        t = np.linspace(0, 1, 3)
        f = np.array([np.eye(2), np.diag([1.0, 0.0]), np.diag([1.0, -1.0])])
        with pytest.raises(DegenerateInputError):
            frame_energy(p, t, f, np.zeros_like(f))

    def test_curve_validation(self):
        g = np.repeat(np.eye(2)[None], 3, 0)
        w = g.copy()
        with pytest.raises(InvalidInputError):
            DiscreteCurve(np.array([0.0, 1.0]), g[:2], w[:2])
        with pytest.raises(InvalidInputError):
            DiscreteCurve(np.array([0.0, 0.1, 1.0]), g, w)
        with pytest.raises(InvalidInputError):
            DiscreteCurve(np.array([0.0, 0.5, 1.0]), g, w, "midpoint")


class TestCriticality:
    def test_zero_perturbation(self, rng):
        init = rand_init(rng, 4)
        tr = geo.integrate(init, 1.0, 1e-2)
        assert criticality_probe(init, tr, 0, amplitude=0.0) == 0.0

    def test_geodesic_vs_wrong_exponent(self, rng):
        init = rand_init(rng, 4)
        tr = geo.integrate(init, 1.0, 1e-3)
        scale = energy_scale(curve_from_trajectory(tr))
        geo_vals = [criticality_probe(init, tr, s) / scale for s in range(3)]
        assert max(geo_vals) <= 1e-5
        bad = conformal_curve(4, tr.times, 3.0)
        bad_vals = [first_variation_fd(bad, s) / energy_scale(bad) for s in range(3)]
        assert min(bad_vals) >= 100 * max(geo_vals)

    def test_wrong_start(self, rng):
        init = rand_init(rng, 4)
        other = rand_init(rng, 4)
        tr = geo.integrate(other, 0.1, 1e-2)
        with pytest.raises(InvalidInputError):
            criticality_probe(init, tr, 0)
