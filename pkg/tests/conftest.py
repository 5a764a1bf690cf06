import time

import pytest

SUITE_LIMIT = 120.0
_RESULTS: list[tuple] = []
_START = [0.0]


def pytest_sessionstart(session):
    _START[0] = time.perf_counter()


@pytest.fixture
def criterion():
    """Record one acceptance line: ``criterion(number, title, ok, seconds, limit, detail)``."""

    def record(number, title, ok, seconds, limit=None, detail=""):
        within = limit is None or seconds < limit
        _RESULTS.append((number, title, ok and within, seconds, limit, detail))
        return ok and within

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _RESULTS:
        return
    elapsed = time.perf_counter() - _START[0]
    # the whole-suite bound is only meaningful when every test file ran
    paths = [a for a in config.invocation_params.args if not a.startswith("-")]
    full = not paths and not config.option.keyword and not config.option.markexpr
    rows = sorted(_RESULTS)
    if full:
        rows.append((10, "whole suite", elapsed < SUITE_LIMIT, elapsed, SUITE_LIMIT, ""))
    tr = terminalreporter
    tr.section("acceptance")
    for number, title, ok, seconds, limit, detail in rows:
        bound = f" (limit {limit:g} s)" if limit is not None else ""
        extra = f" - {detail}" if detail else ""
        tr.write_line(f"[{'PASS' if ok else 'FAIL'}] {number:>2}. {title}: {seconds:.2f} s{bound}{extra}")
    if full and elapsed >= SUITE_LIMIT:
        tr.write_line(f"suite took {elapsed:.1f} s, over the {SUITE_LIMIT:g} s budget")
