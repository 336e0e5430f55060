import numpy as np
import pytest

from conserva import LotkaVolterraSystem

LAMBDA_AP = np.array([[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 1, 2], [0, 0, 3, 1]], dtype=float)
LAMBDA_R = -np.array([1, 1, 3, 4], dtype=float)

ACCEPTANCE = []


def record(criterion, passed, detail):
    ACCEPTANCE.append((criterion, bool(passed), detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail in sorted(ACCEPTANCE, key=lambda r: r[0]):
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  [{criterion}] {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def lambda_system():
    return LotkaVolterraSystem(LAMBDA_AP, LAMBDA_R)


@pytest.fixture
def predator_prey():
    return LotkaVolterraSystem([[0, 1], [-1, 0]], [-1, 1])


@pytest.fixture
def rps_normalized():
    return np.array([[1, -2, 1], [2, -1, -1], [0, 0, 0]], dtype=float)


def random_simplex_interior(rng, n, count):
    return rng.dirichlet(np.ones(n), size=count)


def zero_last_row_payoff(A_sub, q):
    """Payoff with zero last row whose last column makes q a formal equilibrium."""
    m = A_sub.shape[0]
    A = np.zeros((m + 1, m + 1))
    A[:m, :m] = A_sub
    A[:m, m] = -A_sub @ (q[:-1] / q[-1])
    return A
