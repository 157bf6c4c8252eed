"""Exhaustive bisection width for small graphs."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .graph import Graph, require_even

MAX_N = 28
_BATCH = 1 << 15


@dataclass
class OracleResult:
    bw: int
    optimal_bisections: list[np.ndarray]

    @property
    def count(self) -> int:
        return len(self.optimal_bisections)

    def to_json(self) -> dict:
        return {
            "bw": self.bw,
            "count": self.count,
            "optimal_bisections": [[int(v) for v in y] for y in self.optimal_bisections],
        }


def _check(n: int) -> None:
    require_even(n)
    if not 2 <= n <= MAX_N:
        raise ValueError(f"brute force supports 2 <= n <= {MAX_N}, got {n}")


def _plus_sets(n: int) -> Iterator[tuple[int, ...]]:
    # vertex 0 is always on the +1 side, so each split appears once
    for rest in itertools.combinations(range(1, n), n // 2 - 1):
        yield (0,) + rest


def enumerate_bisections(n: int) -> Iterator[np.ndarray]:
    """Every bisection of ``n`` vertices once, as the +1 set containing vertex 0, lexicographically."""
    _check(n)
    for plus in _plus_sets(n):
        y = np.full(n, -1, dtype=np.int64)
        y[list(plus)] = 1
        yield y


def brute_force_bw(g: Graph) -> OracleResult:
    """Minimum cut over all bisections and every bisection attaining it."""
    _check(g.n)
    n = g.n
    e = g.edge_array
    best = None
    found: list[np.ndarray] = []
    it = _plus_sets(n)
    while True:
        chunk = list(itertools.islice(it, _BATCH))
        if not chunk:
            break
        ys = -np.ones((len(chunk), n), dtype=np.int8)
        rows = np.repeat(np.arange(len(chunk)), n // 2)
        ys[rows, np.asarray(chunk).ravel()] = 1
        if g.m:
            cuts = np.count_nonzero(ys[:, e[:, 0]] != ys[:, e[:, 1]], axis=1)
        else:
            cuts = np.zeros(len(chunk), dtype=np.int64)
        low = int(cuts.min())
        if best is None or low < best:
            best, found = low, []
        if low == best:
            found.extend(ys[cuts == best].astype(np.int64))
    return OracleResult(int(best), found)
