import numpy as np
import pytest

from hermflow.fiber import pullback, random_frame, standard_pair
from hermflow.tangent import random_tangent
from hermflow.geodesic import make_initial

J0 = np.array([[0.0, 1.0], [-1.0, 0.0]])


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)


def rand_pair(rng, n, spread=0.3):
    return pullback(standard_pair(n), random_frame(rng, n, spread))


def rand_init(rng, n, scale=0.5):
    p = rand_pair(rng, n)
    return make_initial(p, random_tangent(p, rng, scale))


# acceptance criteria report, filled by test_acceptance.py
ACCEPTANCE = []
_SESSION = {}


def pytest_sessionstart(session):
    import time
    _SESSION["t0"] = time.perf_counter()


def pytest_terminal_summary(terminalreporter):
    import time
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for line in sorted(ACCEPTANCE):
        tr.write_line(line[1])
    elapsed = time.perf_counter() - _SESSION.get("t0", time.perf_counter())
    status = "PASS" if elapsed < 300 else "FAIL"
    tr.write_line(f"[{status}] suite wall time {elapsed:.1f} s (bound 300 s)")
