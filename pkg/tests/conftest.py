import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    if acceptance is not None and acceptance.LEDGER:
        terminalreporter.section("acceptance criteria")
        for line in acceptance.LEDGER:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def same_up_to_phase(a, b, atol=1e-12):
    return abs(abs(np.vdot(a, b)) - 1.0) < atol
