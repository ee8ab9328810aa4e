import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    doc = getattr(getattr(item, "function", None), "__doc__", None)
    rep.criterion = doc.strip().splitlines()[0] if doc else item.name


def pytest_terminal_summary(terminalreporter):
    """Print one PASS/FAIL line per acceptance criterion."""
    lines = {}
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            if "test_acceptance.py::" not in rep.nodeid:
                continue
            if outcome == "passed" and rep.when != "call":
                continue
            mark = "PASS" if outcome == "passed" else "FAIL"
            lines.setdefault(rep.nodeid, f"{mark}  {rep.criterion}")
    if lines:
        terminalreporter.section("acceptance criteria")
        for nodeid in sorted(lines):
            terminalreporter.write_line(lines[nodeid])
