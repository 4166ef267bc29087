import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_RESULTS: dict[int, list] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number and title")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or report.when != "call":
        return
    n, title = mark.args
    entry = _RESULTS.setdefault(n, [title, True, []])
    entry[1] = entry[1] and report.passed
    detail = getattr(item, "criterion_detail", None)
    if detail:
        entry[2].append(detail)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_RESULTS):
        title, ok, details = _RESULTS[n]
        line = f"criterion {n:2d} {'PASS' if ok else 'FAIL'}: {title}"
        if details:
            line += " [" + "; ".join(details) + "]"
        terminalreporter.write_line(line)
