import numpy as np
import pytest
from hypothesis import strategies as st

from quadcable.dynamics import DEFAULT_J, PlantParams, build_inertia_table


def make_plant(n=5, m=0.5, mi=0.1, li=0.1):
    return PlantParams(m=m, J=DEFAULT_J, link_masses=[mi] * n, link_lengths=[li] * n)


@pytest.fixture(scope="session")
def plant():
    return make_plant()


@pytest.fixture(scope="session")
def table(plant):
    return build_inertia_table(plant)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


finite = st.floats(min_value=-10, max_value=10, allow_nan=False, allow_infinity=False)
vec3 = st.lists(finite, min_size=3, max_size=3).map(np.array)
unit3 = vec3.filter(lambda v: np.linalg.norm(v) > 1e-3).map(lambda v: v / np.linalg.norm(v))


# one line per acceptance criterion, printed at the end of the session
ACCEPTANCE_LINES = []


def report(criterion, passed, detail):
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert passed, line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
