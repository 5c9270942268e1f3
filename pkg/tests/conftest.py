import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

import pytest

_LINES: list[str] = []


class Criterion:
    """Collects sub-checks of one acceptance criterion and logs a single PASS/FAIL line."""

    def __init__(self, number: int, title: str):
        self.number, self.title = number, title
        self.failures: list[str] = []
        self.notes: list[str] = []

    def check(self, cond, msg: str):
        if not bool(cond):
            self.failures.append(msg)

    def note(self, msg: str):
        self.notes.append(msg)

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        ok = exc_type is None and not self.failures
        detail = "; ".join(self.notes)
        if exc_type is not None:
            detail += f"; raised {exc_type.__name__}: {exc}"
        if self.failures:
            detail += "; failed: " + "; ".join(self.failures)
        line = f"criterion {self.number:>2} {'PASS' if ok else 'FAIL'}  {self.title}  [{detail.strip('; ')}]"
        _LINES.append(line)
        print(line)
        if self.failures and exc_type is None:
            raise AssertionError("; ".join(self.failures))
        return False


@pytest.fixture
def criterion():
    return Criterion


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
