import pytest

from symstate.state import Engine
from symstate.terms import TermStore


@pytest.fixture
def store():
    return TermStore()


@pytest.fixture
def engine(store):
    return Engine(store)


@pytest.fixture
def P(store):
    return store.parse


ACCEPTANCE_LINES: list = []


@pytest.fixture
def verdict(request):
    """Record one PASS/FAIL line for an acceptance criterion."""
    def record(ok: bool, detail: str):
        line = f"{'PASS' if ok else 'FAIL'} {request.node.name}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
