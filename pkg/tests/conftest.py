import numpy as np
import pytest

from dfd.graph import build_graph


def transitive_closure(A):
    """Floyd-Warshall reachability over edges j -> i (a_ij > 0)."""
    n = A.shape[0]
    R = (A.T > 0) | np.eye(n, dtype=bool)
    for k in range(n):
        R = R | (R[:, [k]] & R[[k], :])
    return R


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def cycle4():
    # 1 -> 2 -> 3 -> 4 -> 1, leader pinned to agent 1
    A = np.zeros((4, 4))
    A[1, 0] = A[2, 1] = A[3, 2] = A[0, 3] = 1.0
    return build_graph(A, [1.0, 0.0, 0.0, 0.0])


@pytest.fixture
def three_agent():
    return build_graph([[0, 1, 0], [0.5, 0, 1], [1, 0, 0]], [1, 0, 0])


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for key in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[key])
