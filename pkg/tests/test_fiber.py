import numpy as np
import pytest

from hermflow.config import TOL
from hermflow.errors import CompatibilityError, InvalidInputError
from hermflow.fiber import (
    HermitianPair,
    canonical_compatible,
    compatibility_residual,
    make_pair,
    pullback,
    random_frame,
    random_pair,
    standard_pair,
    vol_density,
)
from hermflow.matrix_kernel import pfaffian, skew, standard_symplectic

from conftest import J0, rand_pair

G41 = np.diag([4.0, 1.0])
W2 = np.array([[0.0, 2.0], [-2.0, 0.0]])


class TestCompatibilityResidual:
    def test_standard(self):
        np.testing.assert_array_equal(compatibility_residual(np.eye(2), J0), 0)

    def test_hand_computed(self):
        np.testing.assert_allclose(compatibility_residual(G41, J0), [[0, -0.75], [3, 0]])

    def test_pair_g_gj(self, rng):
        p = rand_pair(rng, 4)
        assert np.linalg.norm(compatibility_residual(p.g, p.g @ p.j)) < 1e-12


class TestMakePair:
    def test_standard(self):
        p = make_pair(np.eye(2), J0)
        np.testing.assert_array_equal(p.j, J0)

    def test_incompatible(self):
        with pytest.raises(CompatibilityError) as ei:
            make_pair(G41, J0)
        assert ei.value.invariant == "compatibility"

    def test_scaled_form(self):
        p = make_pair(G41, W2)
        np.testing.assert_allclose(p.j, [[0, 0.5], [-2, 0]])

    @pytest.mark.parametrize("g, w, which", [
        (np.array([[1.0, 0.1], [0.0, 1.0]]), J0, "g_symmetric"),
        (np.diag([1.0, -1.0]), J0, "g_positive"),
        (np.eye(2), np.array([[0.0, 1.0], [1.0, 0.0]]), "omega_skew"),
        (np.eye(2), np.zeros((2, 2)), "omega_invertible"),
    ])
    def test_named_violations(self, g, w, which):
        with pytest.raises(CompatibilityError) as ei:
            make_pair(g, w)
        assert ei.value.invariant == which

    def test_odd_dimension(self):
        with pytest.raises(InvalidInputError):
            make_pair(np.eye(3), np.zeros((3, 3)))

    def test_conditions_agree(self, rng):
        # J a g-isometry, J^2 = -I and g^-1 w + w^-1 g = 0 hold or fail together
        for k in range(200):
            p = rand_pair(rng, 4)
            g = p.g
            w = p.omega if k % 2 == 0 else p.omega + 0.1 * skew(rng.standard_normal((4, 4)))
            J = np.linalg.solve(g, w)
            c1 = np.linalg.norm(J.T @ g @ J - g) <= 1e-9
            c2 = np.linalg.norm(compatibility_residual(g, w)) <= 1e-9
            c3 = np.linalg.norm(J @ J + np.eye(4)) <= 1e-9
            assert c1 == c2 == c3 == (k % 2 == 0)


class TestCanonical:
    def test_already_compatible(self):
        p = canonical_compatible(np.eye(2), J0)
        np.testing.assert_allclose(p.omega, J0)

    def test_diag(self):
        p = canonical_compatible(G41, J0)
        np.testing.assert_allclose(p.g, G41)
        np.testing.assert_allclose(p.omega, W2, atol=1e-14)

    def test_continuity(self, rng):
        p = rand_pair(rng, 4)
        q = canonical_compatible(p.g, p.omega + 1e-6 * skew(rng.standard_normal((4, 4))))
        assert np.linalg.norm(q.omega - p.omega) < 1e-5
        np.testing.assert_array_equal(q.g, p.g)

    def test_idempotent(self, rng):
        for _ in range(20):
            p = rand_pair(rng, 6)
            q1 = canonical_compatible(p.g, p.omega + 1e-2 * skew(rng.standard_normal((6, 6))))
            q2 = canonical_compatible(q1.g, q1.omega)
            np.testing.assert_allclose(q2.omega, q1.omega, atol=1e-10)


class TestGeneration:
    def test_spread_zero(self):
        p, f = random_pair(7, 4, 0.0)
        np.testing.assert_array_equal(f, np.eye(4))
        np.testing.assert_array_equal(p.g, np.eye(4))
        np.testing.assert_array_equal(p.omega, standard_symplectic(4))

    def test_frame_diag(self):
        p = pullback(standard_pair(2), np.diag([2.0, 1.0]))
        np.testing.assert_allclose(p.g, G41)
        np.testing.assert_allclose(p.omega, W2)

    def test_deterministic(self):
        a, fa = random_pair(11, 6, 0.4)
        b, fb = random_pair(11, 6, 0.4)
        np.testing.assert_array_equal(fa, fb)
        np.testing.assert_array_equal(a.omega, b.omega)

    def test_valid_and_associative(self, rng):
        std = standard_pair(4)
        for s in range(50):
            p, f = random_pair(s, 4, 0.4)
            make_pair(p.g, p.omega)
            assert np.linalg.det(p.j) == pytest.approx(1.0, abs=1e-9)
            np.testing.assert_allclose(p.j.T @ p.g @ p.j, p.g, atol=1e-9)
            f2 = random_frame(rng, 4, 0.3)
            a = pullback(std, f @ f2)
            b = pullback(p, f2)
            np.testing.assert_allclose(a.g, b.g, atol=1e-10)
            np.testing.assert_allclose(a.omega, b.omega, atol=1e-10)

    def test_bad_args(self):
        with pytest.raises(InvalidInputError):
            random_pair(0, 3, 0.1)
        with pytest.raises(InvalidInputError):
            random_pair(0, 4, -0.1)


class TestVolume:
    def test_standard(self):
        assert vol_density(standard_pair(2)) == pytest.approx((1.0, 1.0))

    def test_scaled(self):
        assert vol_density(make_pair(G41, W2)) == pytest.approx((2.0, 2.0))

    def test_random(self):
        for s in range(50):
            p, _ = random_pair(s, 6, 0.4)
            vg, vw = vol_density(p)
            assert vg == pytest.approx(vw, rel=1e-9)
            assert pfaffian(p.omega) ** 2 == pytest.approx(np.linalg.det(p.omega), rel=1e-9)


def test_unchecked_and_dict():
    p = HermitianPair.unchecked(np.eye(2), J0)
    assert p.n == 2
    d = p.as_dict()
    assert d["g"] == [[1.0, 0.0], [0.0, 1.0]]


def test_tolerance_override():
    loose = TOL.with_overrides(compat=1.0, volume=1.0, structure=10.0)
    with pytest.raises(KeyError):
        TOL.with_overrides(bogus=1.0)
    assert loose.compat == 1.0 and TOL.compat == 1e-10
