import numpy as np
import pytest

from weylsym.core import BoundaryMatrix
from weylsym.models import free_jacobi, oscillator

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def fj():
    return free_jacobi()


@pytest.fixture(scope="session")
def osc():
    return oscillator(1.0)


@pytest.fixture(scope="session")
def dirichlet():
    return BoundaryMatrix.from_angle(np.pi / 2)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
