import pytest

from flipin.game import GameParameters


def make_params(**kw):
    base = dict(c_defender=0.2, c_attacker=1.0, c_insider=0.51, c_attacker_to_insider=1.02,
                theta1=0.1, theta2=0.1, gamma_max=0.75)
    base.update(kw)
    return GameParameters(**base)


@pytest.fixture
def fig6():
    return make_params()


@pytest.fixture
def fig7():
    return make_params(c_defender=1.1, c_insider=0.99, c_attacker_to_insider=1.98,
                       theta1=0.33, theta2=0.33, gamma_max=0.9)


@pytest.fixture
def rse_params():
    return make_params(c_attacker_to_insider=1.01, theta1=0.33, theta2=0.33)


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
