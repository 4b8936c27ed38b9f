import os
import sys

from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


import pytest  # noqa: E402


def pytest_configure(config):
    config._verdicts = []


@pytest.fixture
def verdict(request):
    """Record one PASS/FAIL line per acceptance criterion; a test that dies early records FAIL."""
    seen = []

    def record(label, ok, detail=""):
        seen.append(label)
        line = f"{label}: {'PASS' if ok else 'FAIL'}  {detail}".rstrip()
        request.config._verdicts.append(line)
        print(line)
        return ok

    yield record
    if not seen:
        request.config._verdicts.append(f"{request.node.name}: FAIL  (no verdict, test errored)")


def pytest_terminal_summary(terminalreporter, config):
    if config._verdicts:
        terminalreporter.section("acceptance criteria")
        for line in config._verdicts:
            terminalreporter.write_line(line)
