"""Shared test configuration.

Registers a bounded hypothesis profile (property tests stay fast and
deterministic) and a terminal hook that prints one PASS/FAIL line per
acceptance criterion after the run.
"""

from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "suite",
    max_examples=25,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")

_ACCEPTANCE_PREFIX = "test_criterion_"
_acceptance_reports: list[tuple[str, str, bool]] = []


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    name = report.location[2]
    if _ACCEPTANCE_PREFIX in name:
        _acceptance_reports.append((name, report.outcome, report.passed))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_reports:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name, outcome, passed in sorted(_acceptance_reports):
        label = name.split("[")[0].replace("test_", "", 1)
        verdict = "PASS" if passed else f"FAIL ({outcome})"
        terminalreporter.write_line(f"{label}: {verdict}")
