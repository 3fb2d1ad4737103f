import re

import pytest

_CRITERION = re.compile(r"test_criterion_(\d+)_")
_results: dict[int, tuple[bool, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    m = _CRITERION.match(item.name)
    if not m:
        return
    n = int(m.group(1))
    failed = report.failed
    if report.when == "call" or failed:
        doc = (item.function.__doc__ or item.name).strip().splitlines()[0]
        prev_ok = _results.get(n, (True, doc))[0]
        _results[n] = (prev_ok and not failed, doc)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_results):
        ok, doc = _results[n]
        terminalreporter.write_line(f"ACCEPTANCE criterion {n}: {'PASS' if ok else 'FAIL'} - {doc}")
