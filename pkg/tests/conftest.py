import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_RESULTS = {}


@pytest.fixture
def criterion(request):
    """Register an acceptance criterion; its outcome is listed in the summary."""
    label = {}

    def register(name):
        label["name"] = name

    yield register
    if "name" in label:
        _RESULTS[request.node.nodeid] = label["name"]


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.stash_outcome = rep.outcome
    if rep.when == "teardown" and item.nodeid in _RESULTS:
        status = getattr(item, "stash_outcome", "failed")
        _RESULTS[item.nodeid] = (_RESULTS[item.nodeid], status)


def pytest_terminal_summary(terminalreporter):
    rows = [v for v in _RESULTS.values() if isinstance(v, tuple)]
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for name, status in sorted(rows):
        mark = {"passed": "PASS", "skipped": "SKIP"}.get(status, "FAIL")
        terminalreporter.write_line(f"[{mark}] {name}")
