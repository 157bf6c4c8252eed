import numpy as np
import pytest

from bisectcert import Graph, gen_planted_bisection


def random_graph(n, p, seed):
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(len(iu)) < p
    return Graph.from_edges(n, zip(iu[keep].tolist(), ju[keep].tolist()))


def random_bisection(n, rng):
    y = np.array([1] * (n // 2) + [-1] * (n // 2))
    rng.shuffle(y)
    return y


@pytest.fixture
def p4():
    return Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)])


@pytest.fixture
def k44():
    g = Graph.from_edges(8, [(a, b) for a in range(4) for b in range(4, 8)])
    return g, np.array([1] * 4 + [-1] * 4)


@pytest.fixture
def two_k4():
    return gen_planted_bisection(8, 1.0, 0.0, 1)


# acceptance criteria register one summary line each; printed after the run
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
