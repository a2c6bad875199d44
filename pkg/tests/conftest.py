import numpy as np
import pytest

from rlg.graph import Graph, sample_erdos_renyi


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def path3() -> Graph:
    return Graph.from_edges(3, [(0, 1), (1, 2)])


def star3() -> Graph:
    return Graph.from_edges(4, [(0, 1), (0, 2), (0, 3)])


def random_graph(n, p, seed) -> Graph:
    return sample_erdos_renyi(n, p, seed)


def brute_line_adjacency(g: Graph) -> np.ndarray:
    """Edges adjacent iff they share exactly one endpoint."""
    E = [set(map(int, e)) for e in g.edges]
    A = np.zeros((g.m, g.m))
    for a in range(g.m):
        for b in range(g.m):
            if a != b and len(E[a] & E[b]) == 1:
                A[a, b] = 1
    return A


_ACCEPTANCE = {}


def report(number: int, ok: bool, detail: str) -> None:
    """Record one acceptance line; printed in the terminal summary."""
    _ACCEPTANCE[number] = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[number])
