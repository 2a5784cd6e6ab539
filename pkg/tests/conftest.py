import os

from hypothesis import HealthCheck, settings

import simcheck

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=200, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
    if simcheck.RUNS:
        bad = sum(1 for r in simcheck.RUNS if r["violations"])
        terminalreporter.section("simulation structural checks")
        terminalreporter.write_line(f"{len(simcheck.RUNS)} simulation runs checked, {bad} with violations")
