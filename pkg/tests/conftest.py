import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=200, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("quick", max_examples=30, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

_criteria = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_criteria] = {}


@pytest.fixture
def criterion(request):
    """Record an acceptance verdict; the summary prints one line per criterion."""
    lines = request.config.stash[_criteria]

    def report(number: int, status: str, detail: str) -> None:
        lines[number] = f"criterion {number}: {status:<6} {detail}"
        print(lines[number])

    return report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash[_criteria]
    if lines:
        terminalreporter.section("acceptance criteria")
        for k in sorted(lines):
            terminalreporter.write_line(lines[k])
