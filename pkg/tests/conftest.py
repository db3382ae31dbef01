import numpy as np
import pytest

from qcflab.model import make_params

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def params_8_2():
    return make_params(8, 2, 1.0, -0.125)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def fig1():
    from qcflab.experiments import figure1

    return figure1()


@pytest.fixture(scope="session")
def fig2():
    from qcflab.experiments import figure2

    return figure2()


@pytest.fixture(scope="session")
def fig3():
    from qcflab.experiments import figure3

    return figure3()


@pytest.fixture(scope="session")
def fig4():
    from qcflab.experiments import figure4

    return figure4()
