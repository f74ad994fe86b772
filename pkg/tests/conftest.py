import math

import numpy as np
import pytest
from hypothesis import strategies as st

from renorm_nbody.dynamics import PhaseState, SystemSpec

# acceptance results collected by test_acceptance.py, printed at the end of the run
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])


# --- two-body reference configurations -------------------------------------------

def unit_pair():
    """G = 1, m = (1, 1), separation 1, at rest."""
    return SystemSpec([1.0, 1.0]), PhaseState([[0, 0, 0], [1, 0, 0]], np.zeros((2, 3)))


def circular_state(t: float = 0.0):
    """Equal masses 1/2 at separation 1 on a circular orbit; angular rate and G are 1."""
    c, s = math.cos(t), math.sin(t)
    q = [[-0.5 * c, -0.5 * s, 0.0], [0.5 * c, 0.5 * s, 0.0]]
    v = [[0.5 * s, -0.5 * c, 0.0], [-0.5 * s, 0.5 * c, 0.0]]
    return PhaseState(q, v, t, t)


@pytest.fixture
def circular():
    return SystemSpec([0.5, 0.5]), circular_state(0.0)


@pytest.fixture
def pythagorean():
    from renorm_nbody.problems import gen_pythagorean
    return gen_pythagorean().to_system()


# --- random non-degenerate systems -----------------------------------------------

@st.composite
def systems(draw, min_bodies=2, max_bodies=5, with_velocity=True):
    """A (spec, q, v) triple with masses over three decades and no near-collisions."""
    n = draw(st.integers(min_bodies, max_bodies))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    masses = 10.0 ** rng.uniform(-1.5, 1.5, n)
    G = 10.0 ** rng.uniform(-1, 1)
    while True:
        q = rng.normal(size=(n, 3))
        i, j = np.triu_indices(n, 1)
        if np.min(np.linalg.norm(q[i] - q[j], axis=1)) > 1e-2:
            break
    v = rng.normal(size=(n, 3)) if with_velocity else np.zeros((n, 3))
    return SystemSpec(masses, G=G), q, v
