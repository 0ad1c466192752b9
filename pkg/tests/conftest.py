from __future__ import annotations

import pytest

_VERDICTS: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call":
        return
    number, title = mark.args
    status = "PASS" if rep.passed else "FAIL"
    if _VERDICTS.get(number, ("PASS",))[0] == "FAIL":
        status = "FAIL"
    _VERDICTS[number] = (status, title)


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_VERDICTS):
        status, title = _VERDICTS[number]
        terminalreporter.write_line(f"{status} criterion {number:2d}: {title}")
