"""Prints one PASS/FAIL line per acceptance criterion at the end of the run."""

import pytest

_OUTCOMES: list[tuple[str, str]] = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        _OUTCOMES.append(("PASS" if rep.passed else "FAIL", mark.args[0]))


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for status, name in _OUTCOMES:
        terminalreporter.write_line(f"{status} {name}")
