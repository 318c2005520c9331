import sys
from pathlib import Path

import pytest

from pbkit.model import zurich_fixture

sys.path.insert(0, str(Path(__file__).parent))

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def fixture_instance():
    return zurich_fixture()


@pytest.fixture
def record():
    """Log a pass/fail line for an acceptance criterion, then assert it."""

    def _record(criterion: str, ok: bool, detail: str = ""):
        ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  {criterion}  {detail}".rstrip())
        assert ok, f"{criterion}: {detail}"

    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
