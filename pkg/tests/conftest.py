"""Collects one pass/fail line per acceptance criterion and prints them at the end."""

ACCEPTANCE_LINES = {}


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance.py::" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    ACCEPTANCE_LINES[name] = ("PASS" if report.passed else "FAIL", report.duration)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for name, (status, secs) in sorted(ACCEPTANCE_LINES.items()):
        terminalreporter.write_line(f"{status}  {name}  ({secs:.1f} s)")
