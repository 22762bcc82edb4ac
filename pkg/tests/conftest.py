"""Shared fixtures and the acceptance summary.

Tests marked ``@pytest.mark.criterion(k, "title")`` are grouped by ``k``;
after the run one PASS/FAIL line is printed per criterion, PASS only when
every test of that criterion passed.
"""
from collections import OrderedDict

import numpy as np
import pytest

_RESULTS = OrderedDict()
_NOTES = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(k, title): acceptance criterion k")


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m:
            k, title = m.args
            _RESULTS.setdefault(k, {"title": title, "outcomes": []})


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    for k, entry in _RESULTS.items():
        if report.nodeid in entry.setdefault("ids", set()):
            entry["outcomes"].append((report.nodeid, report.outcome))


def pytest_runtest_setup(item):
    m = item.get_closest_marker("criterion")
    if m:
        _RESULTS[m.args[0]].setdefault("ids", set()).add(item.nodeid)


@pytest.fixture
def note(request):
    """Attach a one-line measurement to the test's acceptance summary line."""
    def add(text):
        _NOTES.setdefault(request.node.nodeid, []).append(text)
    return add


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for k in sorted(_RESULTS):
        entry = _RESULTS[k]
        outcomes = entry["outcomes"]
        if not outcomes:
            continue
        ok = all(o == "passed" for _, o in outcomes)
        tr.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {k:>2}: {entry['title']}")
        for nodeid, outcome in outcomes:
            name = nodeid.split("::", 1)[-1]
            details = "; ".join(_NOTES.get(nodeid, []))
            tr.write_line(f"        {outcome:<7} {name}" + (f"  [{details}]" if details else ""))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
