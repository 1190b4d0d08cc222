import numpy as np
import pytest
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fullbody.config import flyby_config
from fullbody.liegroup import rodrigues_exp
from fullbody.potential import dumbbell_model
from fullbody.runner import initial_state
from fullbody.system import BodySystem

finite = st.floats(-10.0, 10.0, allow_nan=False, allow_infinity=False)
vec3 = arrays(np.float64, 3, elements=finite)
mat3 = arrays(np.float64, (3, 3), elements=finite)


@st.composite
def rotations(draw):
    axis = draw(arrays(np.float64, 3, elements=st.floats(-1, 1)))
    angle = draw(st.floats(0.0, np.pi))
    n = np.linalg.norm(axis)
    if n < 1e-6:
        return np.eye(3)
    return rodrigues_exp(axis / n * angle)


def random_rotation(rng):
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
        [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
        [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
    ])


def random_spd_nonstd(rng, lo=0.05, hi=1.0):
    """Nonstandard inertia of a genuine 3D body (positive eigenvalues)."""
    Q = random_rotation(rng)
    return Q @ np.diag(rng.uniform(lo, hi, 3)) @ Q.T


@pytest.fixture(scope="session")
def flyby_cfg():
    return flyby_config()


@pytest.fixture(scope="session")
def flyby_system(flyby_cfg):
    return flyby_cfg.system()


@pytest.fixture(scope="session")
def flyby_state(flyby_cfg, flyby_system):
    return initial_state(flyby_cfg, flyby_system)


@pytest.fixture
def rng():
    return np.random.default_rng(20240517)


def flyby_bodies():
    b1 = dumbbell_model(1.5, 0.25, [0.0004, 0.0238, 0.0238])
    b2 = dumbbell_model(3.0, 0.5, [0.0030, 0.1905, 0.1905])
    return BodySystem.pair(b1, b2)


# One line per acceptance criterion, echoed in the terminal summary.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
