"""Small hand-built graphs on which the bound is known not to be tight."""

from __future__ import annotations

import numpy as np

from .graph import Graph


def _clique(vs):
    return [(a, b) for i, a in enumerate(vs) for b in vs[i + 1 :]]


def path_fixture() -> tuple[Graph, np.ndarray]:
    """Two K4s joined by the path 3-4-5-6; the optimal split cuts the edge 4-5.

    Bisection width 1.
    """
    edges = _clique([0, 1, 2, 3]) + _clique([6, 7, 8, 9]) + [(3, 4), (4, 5), (5, 6)]
    y = np.array([1] * 5 + [-1] * 5, dtype=np.int64)
    return Graph.from_edges(10, edges), y


def isolated_pair_fixture() -> tuple[Graph, np.ndarray]:
    """A 4-cycle plus two isolated vertices. Bisection width 2."""
    g = Graph.from_edges(6, [(0, 1), (1, 2), (2, 3), (0, 3)])
    y = np.array([1, 1, -1, -1, 1, -1], dtype=np.int64)
    return g, y


def lattice_fixture() -> tuple[Graph, np.ndarray]:
    """A 2x2 ladder whose rungs 0-2 and 1-3 are the only cut edges.

    Ladder vertices 0, 1 (side +1) and 2, 3 (side -1) each hang off their own
    K5; the K5s on a side are joined by one edge. 24 vertices, width 2.
    """
    blobs = [list(range(4 + 5 * i, 9 + 5 * i)) for i in range(4)]
    edges = [e for b in blobs for e in _clique(b)]
    edges += [(0, 2), (1, 3), (0, 1), (2, 3), (0, 4), (1, 9), (4, 9), (2, 14), (3, 19), (14, 19)]
    y = np.full(24, -1, dtype=np.int64)
    y[[0, 1] + blobs[0] + blobs[1]] = 1
    return Graph.from_edges(24, edges), y


FIXTURES = {
    "path": path_fixture,
    "isolated-pair": isolated_pair_fixture,
    "lattice": lattice_fixture,
}
