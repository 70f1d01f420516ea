"""Shared fixtures and the acceptance summary hook."""

import pytest

from circlespec import (JumpPLFunction, doubling_lift, keller_rugh,
                        second_eigenpair, step_eigenfunction,
                        transition_matrix)

ACCEPTANCE_LINES = []


def record_acceptance(k: int, ok: bool, detail: str = "") -> None:
    line = "ACCEPTANCE %d: %s" % (k, "PASS" if ok else "FAIL")
    if detail:
        line += "  (%s)" % detail
    ACCEPTANCE_LINES.append(line)
    print(line, flush=True)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def keller():
    return keller_rugh()


@pytest.fixture(scope="session")
def doubling():
    return doubling_lift()


@pytest.fixture(scope="session")
def phi2_pair(keller):
    """(lambda2, phi_v2) with phi_v2 the exact step eigenfunction on sixths."""
    M = transition_matrix(keller)
    lam2, v2 = second_eigenpair(M)
    return lam2, JumpPLFunction.from_step(step_eigenfunction(v2, 6))
