import numpy as np
import pytest

from nskorteweg import ModelParams

ACCEPTANCE_LINES = []


@pytest.fixture
def case1():
    return ModelParams.from_coefficients(1.0, 1.0, 0.5, 2.0, n=2)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
