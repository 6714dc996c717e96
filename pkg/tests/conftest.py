import os
from collections import defaultdict

import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

os.environ.setdefault("BAYESMI_TEST_MODE", "1")

_CRITERIA = defaultdict(list)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _CRITERIA[marker.args[0]].append((item.name, report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        results = _CRITERIA[number]
        failed = [name for name, outcome in results if outcome == "failed"]
        skipped = [name for name, outcome in results if outcome == "skipped"]
        if failed:
            status = "FAIL"
        elif skipped and len(skipped) == len(results):
            status = "SKIP"
        else:
            status = "PASS"
        detail = f"{len(results) - len(failed) - len(skipped)}/{len(results)} checks passed"
        if failed:
            detail += "; failing: " + ", ".join(failed)
        terminalreporter.write_line(f"criterion {number:>2}: {status}  ({detail})")
