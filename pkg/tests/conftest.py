"""Collects ``acceptance(criterion=k)`` results and prints one line per criterion."""

import pytest

TITLES = {
    1: "lens transform of the BG vortex equals the perfect vortex",
    2: "ring radius constant in q, BG core radius grows",
    3: "phase winding equals the charge",
    4: "negative regions in all six Wigner slices for q=2",
    5: "negativity curve peaks at q=2 (n(2) = 1.287)",
    6: "Wigner marginal reproduces |psi|^2",
    7: "BG vortex is unit-normalised",
    8: "special-function suite",
    9: "CLI output is deterministic",
}

_criterion_of = {}
_outcomes = {}


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("acceptance")
        if mark is not None:
            _criterion_of[item.nodeid] = mark.kwargs["criterion"]


def pytest_runtest_logreport(report):
    k = _criterion_of.get(report.nodeid)
    if k is None:
        return
    state = _outcomes.setdefault(k, {"passed": 0, "failed": 0})
    if report.failed:
        state["failed"] += 1
    elif report.when == "call" and report.passed:
        state["passed"] += 1


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(TITLES):
        state = _outcomes.get(k)
        if state is None:
            status = "NOT RUN"
        elif state["failed"]:
            status = "FAIL"
        else:
            status = "PASS"
        terminalreporter.write_line(f"criterion {k}: {status:<7} {TITLES[k]}")


@pytest.fixture
def cpu_threads():
    import os

    return max(4, os.cpu_count() or 1)
