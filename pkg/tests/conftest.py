"""Acceptance bookkeeping: tests marked ``criterion(n, title)`` are rolled up
into one PASS/FAIL/SKIP line per criterion at the end of the run."""
from __future__ import annotations

import pytest

_RESULTS: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.fixture
def detail(request):
    """Append a short measurement string to the criterion summary line."""
    def add(text: str) -> None:
        request.node.user_properties.append(("detail", text))

    return add


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        number, title = mark.args
        entry = _RESULTS.setdefault(number, {"title": title, "outcomes": [], "details": []})
        entry["outcomes"].append(rep.outcome)
        entry["details"].extend(v for k, v in item.user_properties if k == "detail")
        if rep.outcome == "skipped" and isinstance(rep.longrepr, tuple):
            entry["details"].append(rep.longrepr[2])


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        entry = _RESULTS[number]
        outcomes = entry["outcomes"]
        if "failed" in outcomes:
            verdict = "FAIL"
        elif all(o == "skipped" for o in outcomes):
            verdict = "SKIP"
        else:
            verdict = "PASS"
        info = "; ".join(dict.fromkeys(entry["details"]))
        terminalreporter.write_line(f"criterion {number}: {verdict}  {entry['title']}" + (f"  [{info}]" if info else ""))
