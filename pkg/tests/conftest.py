"""Collects acceptance outcomes and prints one PASS/FAIL line per criterion."""

import pytest

_RESULTS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, text): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call" and not rep.failed:
        return
    num, text = mark.args
    detail = item.user_properties and dict(item.user_properties).get("detail", "")
    prev = _RESULTS.get(num)
    if prev is None or rep.failed:
        _RESULTS[num] = ("PASS" if rep.passed else "FAIL", text, detail or "")


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_RESULTS):
        status, text, detail = _RESULTS[num]
        line = f"[{status}] criterion {num:2d}: {text}"
        terminalreporter.write_line(line + (f" ({detail})" if detail else ""))
