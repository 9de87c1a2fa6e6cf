import re

_AC_RESULTS = {}


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_ac(\d+)_", report.nodeid)
    if not m:
        return
    label = f"AC-{m.group(1)}"
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        detail = dict(report.user_properties).get("detail", "")
        _AC_RESULTS[label] = (report.outcome, detail)


def pytest_terminal_summary(terminalreporter):
    if not _AC_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_AC_RESULTS, key=lambda s: int(s.split("-")[1])):
        outcome, detail = _AC_RESULTS[label]
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{label} {status} {detail}".rstrip())
