from __future__ import annotations

from functools import lru_cache

import pytest
from hypothesis import settings

from fusionscan.fixtures import fixture

settings.register_profile("fusionscan", max_examples=40, deadline=None)
settings.load_profile("fusionscan")


@lru_cache(maxsize=None)
def cached_fixture(name: str):
    return fixture(name)


@pytest.fixture
def group():
    return cached_fixture


# one line per acceptance criterion, repeated at the end of the run
CRITERION_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if CRITERION_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(CRITERION_LINES):
            terminalreporter.write_line(line)
