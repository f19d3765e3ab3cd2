import pytest

from duo_standby.transform import SystemModel

ACCEPTANCE_LINES = []


@pytest.fixture
def golden():
    return SystemModel.from_literals("exp(1)", "exp(1)", "exp(1)", "exp(1)")


@pytest.fixture
def uniform_slow_repair():
    # repairs never finish inside a work period, so tau = W1 + W2
    return SystemModel.from_literals("uniform(0,1)", "uniform(0,1)", "det(2)", "det(2)")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
