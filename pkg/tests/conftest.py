from __future__ import annotations

from collections import OrderedDict

import mpmath
import pytest

from _oracle import DPS

CRITERIA = OrderedDict(
    [
        (1, "orthogonality and Biedenharn-Elliott residuals"),
        (2, "closed forms for torus links and the unknot"),
        (3, "QV tables"),
        (4, "twenty-digit k52 / m36 discrimination"),
        (5, "fig8 and fig8_sister bit-identical"),
        (6, "surgery Q_r tables"),
        (7, "pruned state sum equals brute force"),
        (8, "Phi_r log-line slopes"),
        (9, "thread-count determinism"),
    ]
)

_outcomes: dict = {}


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run the extended long-tail checks")


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")
    mpmath.mp.dps = DPS


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip = pytest.mark.skip(reason="extended check, enable with --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


def pytest_runtest_logreport(report):
    crit = getattr(report, "criterion", None)
    if crit is None:
        return
    state = _outcomes.setdefault(crit, {"passed": 0, "failed": 0, "skipped": 0})
    if report.failed:
        state["failed"] += 1
    elif report.when == "call" and report.passed:
        state["passed"] += 1
    elif report.skipped:
        state["skipped"] += 1


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is not None and "slow" not in item.keywords:
        rep.criterion = marker.args[0]


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n, title in CRITERIA.items():
        st = _outcomes.get(n)
        if st is None:
            line = "NOT RUN"
        elif st["failed"]:
            line = f"FAIL ({st['failed']} failing)"
        elif st["passed"]:
            line = f"PASS ({st['passed']} checks)"
        else:
            line = "SKIPPED"
        terminalreporter.write_line(f"criterion {n} [{title}]: {line}")
