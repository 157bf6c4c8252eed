"""Graphs, bisection vectors, seeded generators and the monotone adversary.

Vertices are 0-based everywhere. A bisection vector is an integer array with
entries in {+1, -1} and zero sum; side +1 and side -1 are the two halves.

Every stochastic routine takes an explicit integer seed and draws from
``numpy.random.Generator(PCG64(seed))``, so identical parameters and seed give
an identical edge set on every platform numpy supports.
"""

from __future__ import annotations

import enum
import json
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

import networkx as nx
import numpy as np

log = logging.getLogger(__name__)


class GraphFormatError(ValueError):
    """Malformed edge-list document."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class InvalidMoveError(ValueError):
    def __init__(self, message: str, index: int):
        self.index = index
        super().__init__(f"move {index}: {message}")


class InfeasibleParameters(ValueError):
    pass


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed)))


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph on vertices ``0..n-1``.

    ``edges`` is stored as a sorted tuple of ``(u, v)`` pairs with ``u < v``.
    Use :meth:`from_edges` to build one from arbitrary input; the plain
    constructor assumes the edges are already canonical.
    """

    n: int
    edges: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"vertex count must be positive, got {self.n}")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]]) -> "Graph":
        seen = set()
        for e in edges:
            u, v = int(e[0]), int(e[1])
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge {{{u},{v}}} out of range for n={n}")
            key = (u, v) if u < v else (v, u)
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen.add(key)
        return cls(n, tuple(sorted(seen)))

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def edge_array(self) -> np.ndarray:
        if not self.edges:
            return np.zeros((0, 2), dtype=np.int64)
        return np.asarray(self.edges, dtype=np.int64)

    @cached_property
    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        e = self.edge_array
        a[e[:, 0], e[:, 1]] = 1.0
        a[e[:, 1], e[:, 0]] = 1.0
        a.setflags(write=False)
        return a

    @cached_property
    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=np.int64)
        e = self.edge_array
        np.add.at(deg, e[:, 0], 1)
        np.add.at(deg, e[:, 1], 1)
        return deg

    @cached_property
    def neighbors(self) -> tuple[frozenset[int], ...]:
        nbrs: list[set[int]] = [set() for _ in range(self.n)]
        for u, v in self.edges:
            nbrs[u].add(v)
            nbrs[v].add(u)
        return tuple(frozenset(s) for s in nbrs)

    @cached_property
    def edge_set(self) -> frozenset[tuple[int, int]]:
        return frozenset(self.edges)

    def has_edge(self, u: int, v: int) -> bool:
        return ((u, v) if u < v else (v, u)) in self.edge_set

    def with_edges(self, edges: Iterable[tuple[int, int]]) -> "Graph":
        return Graph(self.n, tuple(sorted(edges)))

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_edges_from(self.edges)
        return g

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"


def require_even(n: int) -> None:
    if n % 2:
        raise ValueError(f"bisection needs an even vertex count, got n={n}")


def as_bisection(x, n: int | None = None) -> np.ndarray:
    """Validate ``x`` as a bisection vector and return it as an int array."""
    y = np.asarray(x)
    if y.ndim != 1:
        raise ValueError("bisection vector must be one-dimensional")
    if n is not None and len(y) != n:
        raise ValueError(f"length mismatch: vector has {len(y)} entries, graph has {n} vertices")
    if not np.all((y == 1) | (y == -1)):
        raise ValueError("bisection vector entries must be +1 or -1")
    y = y.astype(np.int64)
    if int(y.sum()) != 0:
        raise ValueError(f"bisection vector must have zero sum, got {int(y.sum())}")
    return y


def canonical_sign(y: np.ndarray) -> np.ndarray:
    """Return ``y`` or ``-y``, whichever has first entry +1."""
    y = np.asarray(y, dtype=np.int64)
    return y if y[0] == 1 else -y


def cut_width(g: Graph, x) -> int:
    """Number of edges whose endpoints lie on opposite sides of ``x``."""
    x = np.asarray(x)
    if len(x) != g.n:
        raise ValueError(f"length mismatch: vector has {len(x)} entries, graph has {g.n} vertices")
    if g.m == 0:
        return 0
    e = g.edge_array
    return int(np.count_nonzero(x[e[:, 0]] != x[e[:, 1]]))


# -- edge-list text format -------------------------------------------------


def graph_from_edge_list(text: str) -> Graph:
    """Parse the ``"n m"`` header + ``"u v"`` lines format."""
    lines = [(i + 1, ln.strip()) for i, ln in enumerate(text.splitlines())]
    lines = [(i, ln) for i, ln in lines if ln]
    if not lines:
        raise GraphFormatError("empty document", 1)
    lineno, header = lines[0]
    parts = header.split()
    if len(parts) != 2:
        raise GraphFormatError(f"expected header 'n m', got {header!r}", lineno)
    try:
        n, m = int(parts[0]), int(parts[1])
    except ValueError:
        raise GraphFormatError(f"non-integer header {header!r}", lineno) from None
    if n < 1 or m < 0:
        raise GraphFormatError(f"invalid header n={n} m={m}", lineno)
    body = lines[1:]
    if len(body) != m:
        raise GraphFormatError(f"header announces {m} edges, found {len(body)}", lineno)
    seen: set[tuple[int, int]] = set()
    for lineno, ln in body:
        parts = ln.split()
        if len(parts) != 2:
            raise GraphFormatError(f"expected 'u v', got {ln!r}", lineno)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphFormatError(f"non-integer vertex in {ln!r}", lineno) from None
        if u == v:
            raise GraphFormatError(f"self-loop at vertex {u}", lineno)
        if not (0 <= u < n and 0 <= v < n):
            raise GraphFormatError(f"vertex out of range 0..{n - 1} in {ln!r}", lineno)
        key = (min(u, v), max(u, v))
        if key in seen:
            raise GraphFormatError(f"duplicate edge {key[0]} {key[1]}", lineno)
        seen.add(key)
    return Graph(n, tuple(sorted(seen)))


def graph_to_edge_list(g: Graph) -> str:
    out = [f"{g.n} {g.m}"]
    out.extend(f"{u} {v}" for u, v in g.edges)
    return "\n".join(out) + "\n"


def read_graph(path) -> Graph:
    with open(path, encoding="utf-8") as fh:
        return graph_from_edge_list(fh.read())


def write_graph(g: Graph, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(graph_to_edge_list(g))


# -- planted instances -----------------------------------------------------


@dataclass(frozen=True)
class PlantedInstance:
    graph: Graph
    planted: np.ndarray = field(repr=False)
    params: dict
    seed: int

    def to_json(self) -> dict:
        return {
            "n": self.graph.n,
            "params": self.params,
            "seed": self.seed,
            "planted": [int(v) for v in self.planted],
            "edges": [[u, v] for u, v in self.graph.edges],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "PlantedInstance":
        n = int(doc["n"])
        g = Graph.from_edges(n, doc["edges"])
        return cls(g, as_bisection(doc["planted"], n), dict(doc.get("params", {})), int(doc["seed"]))

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def _planted_labels(n: int, rng: np.random.Generator) -> np.ndarray:
    # first half +1, second half -1, then permuted
    labels = np.repeat(np.array([1, -1], dtype=np.int64), n // 2)
    planted = np.empty(n, dtype=np.int64)
    planted[rng.permutation(n)] = labels
    return planted


def gen_planted_bisection(n: int, p: float, q: float, seed: int) -> PlantedInstance:
    """Sample from the planted bisection model.

    Each pair inside a part becomes an edge with probability ``p``, each pair
    across the parts with probability ``q``, all independently.
    """
    require_even(n)
    for name, val in (("p", p), ("q", q)):
        if not 0.0 <= val <= 1.0:
            raise ValueError(f"{name}={val} is not a probability")
    rng = make_rng(seed)
    planted = _planted_labels(n, rng)
    iu, ju = np.triu_indices(n, 1)
    prob = np.where(planted[iu] == planted[ju], p, q)
    keep = rng.random(len(iu)) < prob
    g = Graph(n, tuple(zip(iu[keep].tolist(), ju[keep].tolist())))
    return PlantedInstance(g, planted, {"family": "planted", "n": n, "p": p, "q": q}, int(seed))


def gen_hypercube(k: int) -> Graph:
    if k < 1:
        raise ValueError(f"hypercube dimension must be >= 1, got {k}")
    n = 1 << k
    edges = [(v, v | (1 << b)) for v in range(n) for b in range(k) if not v & (1 << b)]
    return Graph(n, tuple(sorted(edges)))


def hypercube_dimension_cut(k: int, bit: int) -> np.ndarray:
    v = np.arange(1 << k)
    return np.where(v & (1 << bit), -1, 1).astype(np.int64)


def _bipartite_from_degrees(left, right, cl, cr) -> list[tuple[int, int]]:
    # Gale-Ryser greedy: serve each left vertex from the right vertices with most remaining demand.
    remaining = dict(zip(right, cr))
    edges = []
    for u, c in sorted(zip(left, cl), key=lambda t: -t[1]):
        targets = sorted(remaining, key=lambda w: (-remaining[w], w))[:c]
        if len(targets) < c or any(remaining[w] <= 0 for w in targets):
            raise InfeasibleParameters("cross-degree sequence is not bipartite-graphical")
        for w in targets:
            remaining[w] -= 1
            edges.append((u, w))
    if any(remaining.values()):
        raise InfeasibleParameters("cross-degree sequence is not bipartite-graphical")
    return edges


def _randomize(edges: list[tuple[int, int]], rng: np.random.Generator, rounds: int, keep_sides) -> list:
    """Degree-preserving double edge swaps.

    ``keep_sides`` maps a vertex to its side for bipartite swaps (first
    endpoint stays on the left), or is None for ordinary swaps.
    """
    edges = [tuple(e) for e in edges]
    if len(edges) < 2:
        return edges
    present = {frozenset(e) for e in edges}
    for _ in range(rounds):
        i, j = rng.integers(len(edges), size=2)
        if i == j:
            continue
        a, b = edges[i]
        c, d = edges[j]
        if keep_sides is None and rng.random() < 0.5:
            c, d = d, c
        if len({a, b, c, d}) < 4:
            continue
        e1, e2 = frozenset((a, d)), frozenset((c, b))
        if e1 in present or e2 in present:
            continue
        present -= {frozenset((a, b)), frozenset((c, d))}
        present |= {e1, e2}
        edges[i], edges[j] = (a, d), (c, b)
    return edges


def gen_planted_regular(n: int, r: int, b: int, seed: int) -> PlantedInstance:
    """Planted r-regular graph whose planted bisection cuts exactly ``b`` edges.

    Cross degrees are spread as evenly as possible over randomly chosen
    vertices of each side; both the bipartite cross graph and the two inner
    graphs are built deterministically and then mixed with degree-preserving
    random swaps. The resulting distribution is *not* uniform over r-regular
    graphs of bisection width b.
    """
    require_even(n)
    h = n // 2
    if r < 0 or b < 0:
        raise InfeasibleParameters("r and b must be nonnegative")
    if r >= h:
        raise InfeasibleParameters(f"need r < n/2, got r={r}, n={n}")
    if b > h * h or b > h * r:
        raise InfeasibleParameters(f"cut width b={b} exceeds what {r}-regular halves of size {h} allow")
    if (h * r - b) % 2:
        raise InfeasibleParameters(f"r*(n/2) - b = {h * r - b} must be even")
    rng = make_rng(seed)
    planted = _planted_labels(n, rng)
    sides = [np.flatnonzero(planted == 1), np.flatnonzero(planted == -1)]

    cross_deg = []
    for side in sides:
        c = np.full(h, b // h, dtype=np.int64)
        c[rng.permutation(h)[: b % h]] += 1
        cross_deg.append(c)
    if max(int(c.max()) for c in cross_deg) > r:
        raise InfeasibleParameters("cross degree exceeds r")

    cross = _bipartite_from_degrees(sides[0].tolist(), sides[1].tolist(), cross_deg[0].tolist(), cross_deg[1].tolist())
    cross = _randomize(cross, rng, 20 * max(len(cross), 1), keep_sides=True)

    edges = [tuple(sorted(e)) for e in cross]
    for side, c in zip(sides, cross_deg):
        inner = (r - c).tolist()
        if not nx.is_graphical(inner):
            raise InfeasibleParameters(f"inner degree sequence {sorted(inner)} is not graphical on {h} vertices")
        hh = nx.havel_hakimi_graph(inner)
        local = [(int(side[u]), int(side[v])) for u, v in hh.edges()]
        local = _randomize(local, rng, 20 * max(len(local), 1), keep_sides=None)
        edges.extend(tuple(sorted(e)) for e in local)
    g = Graph.from_edges(n, edges)
    inst = PlantedInstance(g, planted, {"family": "planted_regular", "n": n, "r": r, "b": b}, int(seed))
    assert np.all(g.degrees == r) and cut_width(g, planted) == b
    return inst


# -- monotone adversary ----------------------------------------------------


class MoveKind(str, enum.Enum):
    REMOVE_CUT_EDGE = "remove_cut_edge"
    ADD_INNER_EDGE = "add_inner_edge"


class MonotoneMove(NamedTuple):
    kind: MoveKind
    u: int
    v: int

    def to_json(self) -> dict:
        return {"kind": self.kind.value, "u": self.u, "v": self.v}


def apply_monotone_moves(g: Graph, y, moves: Sequence[MonotoneMove]) -> Graph:
    """Apply adversary moves in order, validating each against the current graph."""
    y = as_bisection(y, g.n)
    edges = set(g.edges)
    for idx, mv in enumerate(moves):
        u, v = int(mv.u), int(mv.v)
        if u == v or not (0 <= u < g.n and 0 <= v < g.n):
            raise InvalidMoveError(f"bad vertex pair ({u}, {v})", idx)
        key = (min(u, v), max(u, v))
        if MoveKind(mv.kind) is MoveKind.REMOVE_CUT_EDGE:
            if y[u] == y[v]:
                raise InvalidMoveError(f"edge {key} does not cross the bisection", idx)
            if key not in edges:
                raise InvalidMoveError(f"edge {key} is not present", idx)
            edges.remove(key)
        else:
            if y[u] != y[v]:
                raise InvalidMoveError(f"pair {key} crosses the bisection", idx)
            if key in edges:
                raise InvalidMoveError(f"edge {key} already exists", idx)
            edges.add(key)
    return g.with_edges(edges)


def sample_monotone_moves(g: Graph, y, count: int, seed: int, kinds: str = "both") -> list[MonotoneMove]:
    """Draw ``count`` moves, each uniform over the moves valid at that point.

    ``kinds`` restricts the pool to ``"remove"``, ``"add"`` or ``"both"``.
    A shorter list is returned if the pool runs dry.
    """
    if count < 0:
        raise ValueError("count must be nonnegative")
    if kinds not in ("both", "add", "remove"):
        raise ValueError(f"unknown move kinds {kinds!r}")
    y = as_bisection(y, g.n)
    rng = make_rng(seed)
    edges = set(g.edges)
    cut = sorted(e for e in edges if y[e[0]] != y[e[1]])
    sides = [np.flatnonzero(y == 1), np.flatnonzero(y == -1)]
    h = g.n // 2
    inner_edges = sum(1 for e in edges if y[e[0]] == y[e[1]])
    inner_free = 2 * (h * (h - 1) // 2) - inner_edges

    moves: list[MonotoneMove] = []
    while len(moves) < count:
        n_rm = len(cut) if kinds != "add" else 0
        n_add = inner_free if kinds != "remove" else 0
        total = n_rm + n_add
        if total == 0:
            log.info("move pool exhausted after %d of %d moves", len(moves), count)
            break
        pick = int(rng.integers(total))
        if pick < n_rm:
            i = int(rng.integers(len(cut)))
            u, v = cut[i]
            cut[i] = cut[-1]
            cut.pop()
            edges.discard((u, v))
            moves.append(MonotoneMove(MoveKind.REMOVE_CUT_EDGE, u, v))
        else:
            # side chosen in proportion to its free pairs, then a uniform free pair in it
            free = []
            for side in sides:
                have = sum(1 for e in edges if y[e[0]] == y[e[1]] == y[side[0]]) if len(side) else 0
                free.append(len(side) * (len(side) - 1) // 2 - have)
            s = 0 if rng.random() * sum(free) < free[0] else 1
            side = sides[s]
            if free[s] * 8 > len(side) * (len(side) - 1) // 2:
                while True:
                    a, c = rng.choice(len(side), size=2, replace=False)
                    u, v = sorted((int(side[a]), int(side[c])))
                    if (u, v) not in edges:
                        break
            else:
                pool = [
                    (int(side[a]), int(side[c]))
                    for a in range(len(side))
                    for c in range(a + 1, len(side))
                    if (min(side[a], side[c]), max(side[a], side[c])) not in edges
                ]
                u, v = sorted(pool[int(rng.integers(len(pool)))])
            edges.add((u, v))
            inner_free -= 1
            moves.append(MonotoneMove(MoveKind.ADD_INNER_EDGE, u, v))
    return moves
