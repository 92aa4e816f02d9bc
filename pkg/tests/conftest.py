import re

_acceptance = {}


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_ac(\d+)_(\w+)", report.nodeid)
    if not m:
        return
    key = (int(m.group(1)), m.group(2))
    if report.when == "call" or report.failed or report.skipped:
        if report.failed:
            _acceptance[key] = "FAIL"
        elif report.when == "call":
            _acceptance.setdefault(key, "PASS")
        elif report.skipped:
            _acceptance[key] = "SKIP"


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for (num, name), status in sorted(_acceptance.items()):
        terminalreporter.write_line(f"AC{num:<2} {status}  {name.replace('_', ' ')}")
