import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from rankone.rmt import ResolventInput

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def toy2():
    """mu = (-1, 1) with equal weights; eigenvalues (it +- sqrt(4 - t^2)) / 2."""
    return ResolventInput(np.array([-1.0, 1.0]), np.array([0.5, 0.5]))


def closed_form_toy2(t):
    r = np.sqrt(complex(4 - t * t))
    return np.array([(1j * t - r) / 2, (1j * t + r) / 2])


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE_LINES: dict = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES, key=lambda k: int(k[2:])):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
