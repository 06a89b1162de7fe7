import re

_CRITERION = re.compile(r"test_acceptance\.py::test_(a\d)_")
_results: dict[str, bool] = {}


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    match = _CRITERION.search(report.nodeid)
    if match:
        name = match.group(1).upper()
        _results[name] = _results.get(name, True) and report.passed


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name in sorted(_results):
        verdict = "PASS" if _results[name] else "FAIL"
        terminalreporter.write_line(f"{name}: {verdict}")
