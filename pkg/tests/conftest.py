import math

import pytest
from hypothesis import settings

from tactile_climb.gait import GaitParams
from tactile_climb.morphology import RobotConfig

settings.register_profile("repo", deadline=None)
settings.load_profile("repo")


@pytest.fixture
def robot():
    return RobotConfig()


@pytest.fixture
def gait():
    return GaitParams()


def scalar_leg(tau, i, Theta, D, xi, n):
    """Reference stepping template written directly from the piecewise cosine."""
    t = math.fmod(tau - 2 * math.pi * xi / n * (i - 1), 2 * math.pi)
    if t < 0:
        t += 2 * math.pi
    if t < 2 * math.pi * D:
        return Theta * math.cos(t / (2 * D))
    return -Theta * math.cos((t - 2 * math.pi * D) / (2 * (1 - D)))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
