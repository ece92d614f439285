import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from qmemsim.codes import build_code

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def cubic5():
    return build_code("cubic3d", 5)


@pytest.fixture(scope="session")
def cubic7():
    return build_code("cubic3d", 7)


@pytest.fixture(scope="session")
def toric8():
    return build_code("toric2d", 8)


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
