"""Shared fixtures and the acceptance-criteria summary lines."""

import pytest

from tcilab.costs import builtin_cost
from tcilab.measures import make_builtin


@pytest.fixture(scope="session")
def mu1():
    return make_builtin("exponential")


@pytest.fixture(scope="session")
def gaussian():
    return make_builtin("gaussian", sigma=1.0)


@pytest.fixture(scope="session")
def cauchy():
    return make_builtin("cauchy")


@pytest.fixture(scope="session")
def alpha1():
    return builtin_cost("alpha1")


@pytest.fixture(scope="session")
def theta2():
    return builtin_cost("theta_p", p=2)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion, printed after the run."""
    rows = {}
    for status in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(status, []):
            nodeid = getattr(rep, "nodeid", "")
            if getattr(rep, "when", None) != "call":
                continue
            if "test_acceptance.py::test_criterion_" not in nodeid:
                continue
            tail = nodeid.rsplit("test_criterion_", 1)[-1]
            num = int("".join(ch for ch in tail if ch.isdigit()) or 0)
            rows[num] = rep.outcome
    if not rows:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for num in sorted(rows):
        outcome = "PASS" if rows[num] == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {num:2d}: {outcome}")
