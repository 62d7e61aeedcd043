"""Collect outcomes of ``@pytest.mark.criterion`` tests and print a summary."""

import pytest

_results = {}


def _outcome(report):
    if report.skipped:
        return "SKIP"
    return "PASS" if report.passed else "FAIL"


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    # a failure in any phase decides; otherwise the call phase (or a setup skip) does
    if report.when == "call" or report.failed or report.skipped:
        number, title = marker.args
        entry = _results.setdefault(number, {"title": title, "outcomes": [], "reasons": []})
        entry["outcomes"].append(_outcome(report))
        if report.skipped and isinstance(report.longrepr, tuple):
            entry["reasons"].append(report.longrepr[2])


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_results):
        entry = _results[number]
        outcomes = entry["outcomes"]
        if "FAIL" in outcomes:
            status = "FAIL"
        elif all(o == "SKIP" for o in outcomes):
            status = "SKIP"
        else:
            status = "PASS"
        line = f"criterion {number}: {status}  {entry['title']}"
        if status == "PASS" and "SKIP" in outcomes:
            line += f"  ({outcomes.count('SKIP')} data-dependent check(s) skipped)"
        if status == "SKIP" and entry["reasons"]:
            line += f"  ({entry['reasons'][0]})"
        terminalreporter.write_line(line)
