import pytest

from oamcycle.components import build_circuit, paper_cycle_circuit
from oamcycle.modespace import ModeSpace

_ACCEPTANCE_LINES = []


@pytest.fixture
def space():
    return ModeSpace(-8, 8, ("a", "b"))


@pytest.fixture
def paper_op(space):
    return build_circuit(paper_cycle_circuit(space))


@pytest.fixture
def criterion():
    """Record one pass/fail line per acceptance criterion."""

    def record(name: str, ok: bool, detail: str = ""):
        line = f"{'PASS' if ok else 'FAIL'}  {name}" + (f"  [{detail}]" if detail else "")
        _ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
