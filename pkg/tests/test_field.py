import numpy as np
import pytest

from hermflow import geodesic as geo
from hermflow.errors import InvalidInputError
from hermflow.fiber import standard_pair
from hermflow.field import FieldError, SampledField, global_energy, map_pointwise, worker_count

from conftest import rand_init


def _integrate(init):
    return geo.integrate(init, 1.0, 1e-2)


@pytest.fixture
def inits(rng):
    return SampledField.build([rand_init(rng, 4) for _ in range(12)], rng.uniform(0.5, 2.0, 12))


class TestSampledField:
    def test_defaults(self):
        f = SampledField.build(["a", "b"])
        assert f.point_ids == (0, 1)
        assert list(f.weights) == [1.0, 1.0]

    @pytest.mark.parametrize("kw", [
        {"weights": [1.0, 0.0]},
        {"point_ids": [3, 3]},
        {"weights": [1.0]},
    ])
    def test_invalid(self, kw):
        with pytest.raises(InvalidInputError):
            SampledField.build(["a", "b"], **kw)


class TestWorkers:
    def test_explicit(self):
        assert worker_count(3) == 3

    def test_env(self, monkeypatch):
        monkeypatch.setenv("HERMFLOW_THREADS", "2")
        assert worker_count() == 2

    @pytest.mark.parametrize("val", ["0", "-1", "two"])
    def test_env_invalid(self, monkeypatch, val):
        monkeypatch.setenv("HERMFLOW_THREADS", val)
        with pytest.raises(InvalidInputError):
            worker_count()


class TestMap:
    def test_identity(self, inits):
        out = map_pointwise(inits, lambda x: x)
        assert out.items == inits.items and out.point_ids == inits.point_ids

    def test_serial_parallel_identical(self, inits):
        a = map_pointwise(inits, _integrate, threads=1)
        b = map_pointwise(inits, _integrate, threads=4)
        for x, y in zip(a.items, b.items):
            assert np.array_equal(x.g, y.g) and np.array_equal(x.omega, y.omega)

    def test_pointwise_independence(self, inits):
        out = map_pointwise(inits, _integrate, threads=3)
        for init, tr in zip(inits.items, out.items):
            assert np.array_equal(_integrate(init).g, tr.g)

    def test_permutation(self, inits):
        perm = np.random.default_rng(0).permutation(len(inits))
        shuffled = SampledField(tuple(inits.point_ids[i] for i in perm),
                                tuple(inits.items[i] for i in perm), inits.weights[perm])
        a = map_pointwise(inits, _integrate, threads=2)
        b = map_pointwise(shuffled, _integrate, threads=2)
        for k, i in enumerate(perm):
            assert np.array_equal(b.items[k].g, a.items[i].g)

    def test_errors_collected(self):
        f = SampledField.build([1, 0, 2, 0])

        def op(x):
            return 1 / x

        with pytest.raises(FieldError) as ei:
            map_pointwise(f, op, threads=2)
        assert sorted(ei.value.errors) == [1, 3]


class TestGlobalEnergy:
    def conformal(self):
        init = geo.make_initial(standard_pair(2), np.eye(2), np.eye(2))
        return geo.integrate(init, 1.0, 1e-3)

    def test_single_conformal(self):
        assert global_energy([self.conformal()], [1.0]) == pytest.approx(4.0, rel=1e-8)

    def test_linearity(self):
        tr = self.conformal()
        e1 = global_energy([tr], [1.0])
        assert global_energy([tr], [2.0]) == 2 * e1
        assert global_energy([tr, tr], [0.5, 0.5]) == pytest.approx(e1, rel=1e-15)

    def test_field_of_geodesics(self, inits):
        out = map_pointwise(inits, _integrate)
        e = global_energy(out.items, inits.weights)
        want = sum(w * i.C for w, i in zip(inits.weights, inits.items))
        assert e == pytest.approx(want, rel=1e-7)

    def test_from_velocities(self, inits):
        # without the I1 monitor the density is rebuilt from X, W and g
        out = map_pointwise(inits, _integrate)
        bare = [geo.Trajectory(t.times, t.g, t.omega, t.x, t.w) for t in out.items]
        assert global_energy(bare, inits.weights, "simpson") == pytest.approx(
            global_energy(out.items, inits.weights, "simpson"), rel=1e-10)

    def test_repeatable(self, inits):
        out = map_pointwise(inits, _integrate, threads=4)
        vals = {global_energy(out.items, inits.weights) for _ in range(3)}
        assert len(vals) == 1

    def test_grid_mismatch(self):
        a = self.conformal()
        b = geo.integrate(geo.make_initial(standard_pair(2), np.eye(2), np.eye(2)), 1.0, 1e-2)
        with pytest.raises(InvalidInputError):
            global_energy([a, b], [1.0, 1.0])

    def test_weight_count(self):
        with pytest.raises(InvalidInputError):
            global_energy([self.conformal()], [1.0, 1.0])
