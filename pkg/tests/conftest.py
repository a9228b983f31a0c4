from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

from resonator.flow_ifs import build_pants_ifs

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

# filled by tests/test_acceptance.py, printed after the run
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "property: invariant/property checks (criterion 10 suite)")
    config.addinivalue_line("markers", "slow: long-running experiment checks")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])


@pytest.fixture(scope="session")
def pants8():
    return build_pants_ifs(8, 8, 8)


@pytest.fixture(scope="session")
def pants12():
    return build_pants_ifs(12, 12, 12)
