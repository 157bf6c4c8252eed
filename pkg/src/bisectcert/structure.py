"""Structure of optimal correction vectors and detectors for certification failure.

A bisection ``y`` induces the correction vector ``d^(y) = -diag(y) A y``
(cross-degree minus same-side degree per vertex). If the bound is tight at
``y``, every optimal ``d`` equals ``d^(y) + alpha*y`` up to a constant shift and
``y`` is a top eigenvector. The detectors below find local patterns that rule
tightness out, and :func:`witness_vector` builds an explicit test vector whose
positive Rayleigh quotient proves it.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .graph import Graph, MonotoneMove, MoveKind, as_bisection, cut_width
from .spectral import DEFAULT_MULT_TOL, top_eigpair_S

WITNESS_TOL = 1e-9
POSITIVE_TOL = 1e-8
PATH_MIN_N = 10
LATTICE_MAX_C = 4


class WitnessConditionError(ValueError):
    """A precondition of the witness construction does not hold."""


def correction_from_bisection(g: Graph, y) -> np.ndarray:
    """``-y_i (A y)_i``: cross neighbours minus same-side neighbours (integer vector)."""
    y = np.asarray(y)
    if y.shape != (g.n,):
        raise ValueError(f"bisection has length {len(y)}, graph has {g.n} vertices")
    y = y.astype(np.int64)
    ay = np.zeros(g.n, dtype=np.int64)
    if g.m:
        e = g.edge_array
        np.add.at(ay, e[:, 0], y[e[:, 1]])
        np.add.at(ay, e[:, 1], y[e[:, 0]])
    d = -y * ay
    if np.all(np.abs(y) == 1):
        assert int(d.sum()) == 4 * cut_width(g, y) - 2 * g.m
    return d


def recover_alpha(g: Graph, y, d_star) -> tuple[float, float]:
    """Split ``d_star - d^(y)`` into ``alpha*y + c*1`` plus a residual.

    Returns ``(alpha, norm of the part outside span{y, 1})``.
    """
    y = as_bisection(y, g.n).astype(float)
    r = np.asarray(d_star, dtype=float) - correction_from_bisection(g, y.astype(np.int64))
    # y is orthogonal to the ones vector, so the projection decouples
    alpha = float(r @ y) / g.n
    c = float(r.mean())
    return alpha, float(np.linalg.norm(r - alpha * y - c))


def check_eigenvector_lemma(g: Graph, d_star, y, mult_tol: float = DEFAULT_MULT_TOL) -> float:
    """``max |B_S y - lambda_max y|`` with ``d_star`` shifted to sum ``4 cw(y) - 2m``."""
    y = as_bisection(y, g.n)
    d = np.asarray(d_star, dtype=float)
    d = d + (4.0 * cut_width(g, y) - 2.0 * g.m - d.sum()) / g.n
    lam = top_eigpair_S(g, d, mult_tol).lambda_max
    yf = y.astype(float)
    by = g.adjacency @ yf + d * yf
    by -= by.mean()  # projection onto S; y already lies in S
    return float(np.max(np.abs(by - lam * yf)))


# -- findings ----------------------------------------------------------------


class SameNeighborPair(NamedTuple):
    u: int
    w: int


class PathSegment(NamedTuple):
    u_prev: int
    u: int
    w: int
    w_next: int


class Lattice(NamedTuple):
    us: tuple[int, ...]
    ws: tuple[int, ...]


def balanced_same_neighbor_violations(g: Graph, y) -> list[SameNeighborPair]:
    """Non-adjacent cross pairs of balanced vertices with different neighbourhoods.

    A vertex is balanced when it has as many cross as same-side neighbours. At
    a tight optimum such pairs must share their neighbourhoods, so every pair
    listed is evidence that the bound falls short of ``cw(y)``.
    """
    y = as_bisection(y, g.n)
    d = correction_from_bisection(g, y)
    nb = g.neighbors
    plus = [v for v in range(g.n) if d[v] == 0 and y[v] == 1]
    minus = [v for v in range(g.n) if d[v] == 0 and y[v] == -1]
    out = []
    for u in plus:
        for w in minus:
            if w not in nb[u] and nb[u] != nb[w]:
                out.append(SameNeighborPair(min(u, w), max(u, w)))
    return sorted(out)


def detect_path_segment(g: Graph, y) -> list[PathSegment]:
    """Cut edges ``u-w`` between two degree-2 vertices whose other neighbours stay on their side.

    ``u`` is always the endpoint on the +1 side. The conclusion (bound not
    tight) needs ``n >= 10``; see :func:`path_segment_applies`.
    """
    y = as_bisection(y, g.n)
    deg = g.degrees
    nb = g.neighbors
    out = []
    for a, b in g.edges:
        if y[a] == y[b] or deg[a] != 2 or deg[b] != 2:
            continue
        u, w = (a, b) if y[a] == 1 else (b, a)
        (u_prev,) = nb[u] - {w}
        (w_next,) = nb[w] - {u}
        if y[u_prev] == 1 and y[w_next] == -1:
            out.append(PathSegment(u_prev, u, w, w_next))
    return sorted(out)


def path_segment_applies(g: Graph) -> bool:
    return g.n >= PATH_MIN_N


def detect_lattice(g: Graph, y, c: int) -> list[Lattice]:
    """2 x c ladders of cut edges ``u_i - w_i`` with rails ``u_i - u_{i+1}``, ``w_i - w_{i+1}``.

    Each ladder vertex has exactly one neighbour outside the ladder, on its own
    side. ``c = 1`` is the path-segment pattern. Ladders are reported once, in
    the orientation whose first rung has the smaller ``u``.
    """
    if not 1 <= c <= LATTICE_MAX_C:
        raise ValueError(f"lattice length must be in 1..{LATTICE_MAX_C}")
    y = as_bisection(y, g.n)
    if c == 1:
        return [Lattice((p.u,), (p.w,)) for p in detect_path_segment(g, y)]
    nb = g.neighbors
    deg = g.degrees
    rungs = {}
    for a, b in g.edges:
        if y[a] != y[b]:
            u, w = (a, b) if y[a] == 1 else (b, a)
            rungs.setdefault(u, []).append(w)

    def extend(us, ws):
        if len(us) == c:
            yield tuple(us), tuple(ws)
            return
        for u2 in nb[us[-1]]:
            if y[u2] != 1 or u2 in us:
                continue
            for w2 in rungs.get(u2, ()):
                if w2 in nb[ws[-1]] and w2 not in ws:
                    yield from extend(us + [u2], ws + [w2])

    found = set()
    for u1, ws1 in rungs.items():
        if deg[u1] != 3:
            continue
        for w1 in ws1:
            for us, ws in extend([u1], [w1]):
                if _ladder_ok(g, y, us, ws) and us[0] < us[-1]:
                    found.add(Lattice(us, ws))
    return sorted(found)


def _ladder_ok(g: Graph, y, us, ws) -> bool:
    nb = g.neighbors
    inside = set(us) | set(ws)
    c = len(us)
    for side, chain in ((1, us), (-1, ws)):
        for i, v in enumerate(chain):
            rails = (i > 0) + (i < c - 1)
            if len(nb[v]) != rails + 2:
                return False
            outside = [x for x in nb[v] if x not in inside]
            if len(outside) != 1 or y[outside[0]] != side:
                return False
    # rails must be exactly consecutive, no chords
    for chain in (us, ws):
        for i, j in itertools.combinations(range(c), 2):
            if (j - i == 1) != (chain[j] in nb[chain[i]]):
                return False
    return all((ws[j] in nb[us[i]]) == (i == j) for i in range(c) for j in range(c))


def lattice_applies(g: Graph, c: int) -> bool:
    return g.n >= PATH_MIN_N * c


def detect_isolated_pair(g: Graph) -> bool:
    """At least two vertices of degree 0."""
    return int(np.count_nonzero(g.degrees == 0)) >= 2


# -- witness vectors ---------------------------------------------------------


@dataclass(frozen=True)
class WitnessParams:
    C_plus: tuple[int, ...]
    C_minus: tuple[int, ...]
    k: int
    delta: int
    l: int
    z: float
    beta: float
    swapped: bool  # sides were exchanged so that the larger set sits on +1

    def to_json(self) -> dict:
        return asdict(self)


def witness_size_condition(k: int, delta: int, l: int) -> str | None:
    """``None`` when the size condition holds, else a message naming the failure."""
    if delta == 0:
        if 3 * k < l:
            return None
        return f"size condition 3k < l fails: 3k = {3 * k}, l = {l}"
    if not 4 * k < l:
        return f"size condition 4k < l fails: 4k = {4 * k}, l = {l}"
    cap = min(4 * k * k / (l - 4 * k), 7 * l / 128)
    if delta < cap:
        return None
    return f"size condition delta < min(4k^2/(l-4k), 7l/128) fails: delta = {delta}, bound = {cap:.6g}"


def witness_z_beta(k: int, delta: int, l: int) -> tuple[float, float]:
    num = 2 * k * l + delta * l + 2 * math.sqrt(k * l * (k + delta) * (l + delta))
    den = 4 * k * k + 4 * k * delta - delta * l
    if den <= 0:
        raise WitnessConditionError(f"witness denominator 4k^2 + 4k*delta - delta*l = {den} is not positive")
    z = num / den
    beta = math.sqrt((delta + l / z**2) / (delta + l))
    return z, beta


def witness_vector(g: Graph, y, C_plus: Sequence[int], C_minus: Sequence[int]) -> tuple[WitnessParams, np.ndarray]:
    """Test vector showing that no ``d^(y) + alpha*y`` makes the bound tight at ``y``.

    ``C_plus``/``C_minus`` are sets of cut-adjacent vertices on the +1/-1 side.
    Vertices in either set get ``z``, the rest of the larger set's side get
    ``-1`` and the rest of the other side ``-beta*z``; ``z`` and ``beta`` make the
    vector sum to zero with equal squared mass on both sides, so the
    ``alpha*y`` term cannot change its Rayleigh quotient. Here ``l`` counts the
    vertices on the larger set's side outside that set, ``n/2 - (k+delta)``.
    """
    y = as_bisection(y, g.n)
    cp, cm = sorted(set(int(v) for v in C_plus)), sorted(set(int(v) for v in C_minus))
    if not cp or not cm:
        raise WitnessConditionError("both vertex sets must be nonempty")
    nb = g.neighbors
    for side, vs, name in ((1, cp, "C_plus"), (-1, cm, "C_minus")):
        for v in vs:
            if not 0 <= v < g.n or y[v] != side:
                raise WitnessConditionError(f"{name} vertex {v} is not on side {side:+d}")
            if not any(y[w] == -side for w in nb[v]):
                raise WitnessConditionError(f"{name} vertex {v} has no neighbour across the cut")
    swapped = len(cp) < len(cm)
    if swapped:
        y, cp, cm = -y, cm, cp
    k, delta = len(cm), len(cp) - len(cm)
    l = g.n // 2 - (k + delta)
    msg = witness_size_condition(k, delta, l)
    if msg:
        raise WitnessConditionError(msg)
    inside = set(cp) | set(cm)
    across = sum(1 for u in cp for w in nb[u] if w in set(cm))
    leaving = sum(1 for u in inside for w in nb[u] if w not in inside)
    if 2 * across < leaving:
        raise WitnessConditionError(
            f"edge condition 2|E(C+,C-)| >= |E(C, rest)| fails: 2*{across} < {leaving}"
        )
    z, beta = witness_z_beta(k, delta, l)
    x = np.where(y == 1, -1.0, -beta * z)
    x[list(inside)] = z
    if abs(x.sum()) > WITNESS_TOL * max(1.0, z) * g.n:
        raise AssertionError(f"witness does not sum to zero: {x.sum()}")
    sq = x * x
    if abs(sq[y == 1].sum() - sq[y == -1].sum()) > WITNESS_TOL * g.n * max(1.0, z * z):
        raise AssertionError("witness squares are not balanced across sides")
    if swapped:
        cp, cm = cm, cp
    return WitnessParams(tuple(cp), tuple(cm), k, delta, l, z, beta, swapped), x


def disprove_tightness(g: Graph, y, x, tol: float = POSITIVE_TOL) -> tuple[float, bool]:
    """``x^T (A + diag d^(y)) x`` and whether it is positive beyond ``tol``."""
    y = as_bisection(y, g.n)
    x = np.asarray(x, dtype=float)
    scale = g.n * max(1.0, float(np.max(np.abs(x))) ** 2)
    if abs(x.sum()) > WITNESS_TOL * scale:
        raise ValueError("witness vector must sum to zero")
    sq = x * x
    if abs(sq[y == 1].sum() - sq[y == -1].sum()) > WITNESS_TOL * scale:
        raise ValueError("witness vector must carry equal squared mass on both sides")
    d = correction_from_bisection(g, y)
    excess = float(x @ (g.adjacency @ x) + d @ sq)
    return excess, excess > tol


# -- exact update under monotone moves ---------------------------------------


def tight_update(g: Graph, y, d_opt, moves: Sequence[MonotoneMove], bw: int) -> tuple[np.ndarray, int]:
    """Correction vector that keeps the bound tight after monotone moves.

    ``d_opt`` must be tight for ``g`` with optimal bisection ``y`` of width
    ``bw``. It is shifted to sum ``4 bw - 2m``, then each move (removing a cut
    edge or adding a same-side edge ``{u, v}``) subtracts one at ``u`` and
    ``v``. Returns the new vector and the new width.
    """
    y = as_bisection(y, g.n)
    d = np.asarray(d_opt, dtype=float)
    d = d + (4.0 * bw - 2.0 * g.m - d.sum()) / g.n
    for mv in moves:
        d[mv.u] -= 1.0
        d[mv.v] -= 1.0
        if MoveKind(mv.kind) is MoveKind.REMOVE_CUT_EDGE:
            bw -= 1
    return d, bw


# -- report ------------------------------------------------------------------


@dataclass
class StructureReport:
    d_y: np.ndarray
    alpha: float | None = None
    eigen_residual: float = 0.0
    off_span_residual: float = 0.0
    violations: list[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "d_y": [int(v) for v in self.d_y],
            "alpha": self.alpha,
            "eigen_residual": self.eigen_residual,
            "off_span_residual": self.off_span_residual,
            "violations": self.violations,
        }


def analyze(g: Graph, y, d_star=None, lattice_max: int = 2) -> StructureReport:
    """Run every structural check for a bisection (and optionally an optimal ``d``)."""
    y = as_bisection(y, g.n)
    rep = StructureReport(d_y=correction_from_bisection(g, y))
    if d_star is not None:
        rep.alpha, rep.off_span_residual = recover_alpha(g, y, d_star)
        rep.eigen_residual = check_eigenvector_lemma(g, d_star, y)
    for p in balanced_same_neighbor_violations(g, y):
        rep.violations.append({"kind": "same_neighbor_pair", "u": p.u, "w": p.w})
    for s in detect_path_segment(g, y):
        rep.violations.append({"kind": "path_segment", **s._asdict(), "applies": path_segment_applies(g)})
    for c in range(2, lattice_max + 1):
        for lat in detect_lattice(g, y, c):
            rep.violations.append(
                {"kind": "lattice", "us": list(lat.us), "ws": list(lat.ws), "applies": lattice_applies(g, c)}
            )
    if detect_isolated_pair(g):
        iso = [int(v) for v in np.flatnonzero(g.degrees == 0)]
        rep.violations.append({"kind": "isolated_pair", "vertices": iso})
    return rep
