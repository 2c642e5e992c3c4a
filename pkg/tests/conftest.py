from __future__ import annotations

import numpy as np
import pytest

from plattice.domain import build_domain
from plattice.energy import Problem
from plattice.model import Potential, PowerNonlinearity


def make_problem(dim=1, side=1, p=2.0, q=4.0, V=0.0, boundary="dirichlet", potential=None, weight=1.0):
    d = build_domain(dim, side, boundary)
    pot = potential if potential is not None else Potential("constant", value=V)
    return Problem(d, pot, PowerNonlinearity(q, weight=weight), p)


@pytest.fixture
def tiny():
    """One vertex, two ghost edges, p=2, f = t^3."""
    return make_problem()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def criterion():
    """Record one pass/fail line per acceptance criterion, then assert."""

    def record(n: int, ok: bool, detail: str) -> None:
        line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES[n] = line
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
