import numpy as np
import pytest

from qaoa_lsc.engine import build_schedule, cost_diagonal
from qaoa_lsc.qubo import build_qubo, generate_instance, qubo_to_ising, shipped_instances


class Problem:
    def __init__(self, inst):
        self.inst = inst
        self.Q = build_qubo(inst)
        self.H = qubo_to_ising(self.Q)
        self.diag = cost_diagonal(self.H)
        self.sched = build_schedule(self.H)
        self.k = inst.k
        self.n = inst.n


@pytest.fixture(scope="session")
def six_var():
    return Problem(generate_instance(6, 3, "low", 1))


@pytest.fixture(scope="session")
def small():
    return Problem(generate_instance(3, 1, "low", 11))


@pytest.fixture(scope="session")
def shipped():
    return [Problem(inst) for inst in shipped_instances()]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE: list[str] = []


@pytest.fixture
def verdict():
    """Record a one-line PASS/FAIL for an acceptance criterion, then assert it."""

    def record(number: int, title: str, ok: bool, detail: str = "") -> None:
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title}"
        if detail:
            line += f"  ({detail})"
        ACCEPTANCE.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
