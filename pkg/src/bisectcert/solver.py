"""Spectral lower bound for minimum bisection, optimization and certification.

For a correction vector ``d`` the bound is

    g(G, d) = (sum(A + diag d) - n * lambda_S(A + diag d)) / 4

which never exceeds the bisection width. :func:`solve` maximizes it, extracts
bisections from the top eigenspace (median split for a simple eigenvalue,
sign-pattern enumeration over a reduced column echelon basis otherwise) and
declares a bisection optimal when its cut width matches the bound.
"""

from __future__ import annotations

import enum
import itertools
import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.optimize

from .graph import Graph, as_bisection, canonical_sign, cut_width, require_even
from .spectral import (
    DEFAULT_MULT_TOL,
    SpectralResult,
    SubspaceBasis,
    corrected_matrix,
    s_basis,
    top_eigpair_reduced,
)
from .structure import correction_from_bisection

log = logging.getLogger(__name__)

CERT_TOL = 1e-6
PIVOT_TOL = 1e-9
ROUND_TOL = 1e-6
MAX_K_CAP = 24


class Status(str, enum.Enum):
    CERTIFIED = "CertifiedOptimum"
    FAIL = "Fail"


class EigenspaceTooLarge(ValueError):
    pass


@dataclass
class SolveOptions:
    max_iters: int = 300
    step0: float | None = None  # first supergradient step; default 2 * max(1, mean degree)
    g_tol: float = 1e-9
    stall_iters: int = 100  # stop after this many iterations without improving by g_tol
    mult_tol: float = DEFAULT_MULT_TOL
    k_cap: int = 16
    seed: int = 0
    restarts: int = 0
    cert_tol: float = CERT_TOL
    polish: bool = True
    polish_every: int = 5
    polish_gap: float = 0.1  # line-search only candidates with cut <= bound * (1 + polish_gap) + 1

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not 1 <= self.k_cap <= MAX_K_CAP:
            raise ValueError(f"k_cap must be in 1..{MAX_K_CAP}")


@dataclass
class TraceEntry:
    value: float
    lam: float
    step: float
    best: float


@dataclass
class SolveReport:
    h_hat: float
    d_best: np.ndarray
    lambda_at_best: float
    multiplicity: int
    bisections: list[np.ndarray]
    best_cut: int
    status: Status
    iterations: int
    trace: list[TraceEntry] = field(default_factory=list, repr=False)
    diagnostics: dict = field(default_factory=dict)

    @property
    def certified(self) -> bool:
        return self.status is Status.CERTIFIED

    def to_json(self, with_trace: bool = False) -> dict:
        doc = {
            "h_hat": float(self.h_hat),
            "best_cut": int(self.best_cut),
            "status": self.status.value,
            "multiplicity": int(self.multiplicity),
            "iterations": int(self.iterations),
            "bisections": [[int(v) for v in y] for y in self.bisections],
            "d_best": [float(v) for v in self.d_best],
            "lambda_at_best": float(self.lambda_at_best),
            "diagnostics": self.diagnostics,
        }
        if with_trace:
            doc["trace"] = [[t.value, t.lam, t.step, t.best] for t in self.trace]
        return doc


# -- the bound and its supergradient ---------------------------------------


def eval_f(g: Graph, d, x) -> float:
    """Relaxed objective: cut term plus the penalty ``sum d_i (x_i^2 - 1)``."""
    d = np.asarray(d, dtype=float)
    x = np.asarray(x, dtype=float)
    if len(x) != g.n or len(d) != g.n:
        raise ValueError("length mismatch")
    e = g.edge_array
    cut = float(np.sum((1.0 - x[e[:, 0]] * x[e[:, 1]]) / 2.0)) if g.m else 0.0
    return cut + float(np.dot(d, x * x - 1.0))


def g_from_lambda(g: Graph, d, lam: float) -> float:
    return (2.0 * g.m + float(np.sum(d)) - g.n * lam) / 4.0


def eval_g(g: Graph, d, mult_tol: float = DEFAULT_MULT_TOL, basis: SubspaceBasis | None = None) -> tuple[float, SpectralResult]:
    d = np.asarray(d, dtype=float)
    if d.shape != (g.n,) or not np.all(np.isfinite(d)):
        raise ValueError("correction vector must be a finite length-n vector")
    basis = basis or s_basis(g.n)
    spec = top_eigpair_reduced(basis.reduce(corrected_matrix(g, d)), basis, mult_tol)
    return g_from_lambda(g, d, spec.lambda_max), spec


def supergradient_g(g: Graph, d, spectral: SpectralResult | None = None) -> np.ndarray:
    """``(1 - n v_i^2) / 4`` for the first unit top eigenvector ``v`` of ``B_S``.

    This is the gradient when the top eigenvalue is simple and a supergradient
    of the concave bound otherwise.
    """
    if spectral is None:
        _, spectral = eval_g(g, d)
    v = spectral.top
    v = v / np.linalg.norm(v)
    return (1.0 - g.n * v * v) / 4.0


def normalize_d(d, target_sum: float) -> np.ndarray:
    """Translate ``d`` along the ones vector so that it sums to ``target_sum``."""
    d = np.asarray(d, dtype=float)
    return d + (target_sum - float(d.sum())) / len(d)


# -- bisection extraction ---------------------------------------------------


def extract_bisection(x, tie_tol: float = 1e-12) -> np.ndarray:
    """Median split of a real vector into a balanced +-1 vector.

    Entries at or above the median go to +1; surplus entries tied with the
    median are moved to -1, lowest index first. Returned in canonical sign
    (first entry +1).
    """
    x = np.asarray(x, dtype=float)
    n = len(x)
    require_even(n)
    med = float(np.median(x))
    y = np.where(x >= med, 1, -1).astype(np.int64)
    surplus = int(y.sum()) // 2
    if surplus > 0:
        tol = tie_tol * max(1.0, float(np.max(np.abs(x))))
        ties = np.flatnonzero((y == 1) & (np.abs(x - med) <= tol))
        assert len(ties) >= surplus, "median split cannot be balanced"
        y[ties[:surplus]] = -1
    return canonical_sign(y)


def certify(g: Graph, h_hat: float, x, tol: float = CERT_TOL) -> Status:
    """Optimal iff the cut of ``x`` meets the lower bound ``h_hat`` (up to ``tol``)."""
    return Status.CERTIFIED if cut_width(g, x) <= h_hat + tol else Status.FAIL


def column_echelon(m: np.ndarray, pivot_tol: float = PIVOT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Reduced column echelon form of an n x k matrix by Gauss-Jordan elimination.

    Returns ``(R, pivots)`` where ``R`` spans the same column space and
    ``R[pivots] == I``. Pivots are chosen by complete pivoting.
    """
    r = np.array(m, dtype=float)
    n, k = r.shape
    pivots = []
    free_rows = np.ones(n, dtype=bool)
    scale = max(1.0, float(np.max(np.abs(r)))) if r.size else 1.0
    for j in range(k):
        sub = np.abs(r[:, j:]) * free_rows[:, None]
        i, c = np.unravel_index(int(np.argmax(sub)), sub.shape)
        if sub[i, c] <= pivot_tol * scale:
            raise np.linalg.LinAlgError(f"eigenbasis has rank {j} < {k}")
        c += j
        r[:, [j, c]] = r[:, [c, j]]
        r[:, j] /= r[i, j]
        for jj in range(k):
            if jj != j:
                r[:, jj] -= r[i, jj] * r[:, j]
        free_rows[i] = False
        pivots.append(i)
    # order columns by pivot row so R looks like an echelon form
    order = np.argsort(pivots)
    return r[:, order], np.asarray(pivots)[order]


def sign_combinations(basis_vecs: np.ndarray, round_tol: float = ROUND_TOL, pivot_tol: float = PIVOT_TOL) -> list[np.ndarray]:
    """All +-1 zero-sum vectors in the span of the k rows of ``basis_vecs``.

    Every such vector equals a +-1 combination of the reduced column echelon
    basis, so checking the 2^k sign patterns is exhaustive. Results are
    canonical-signed and deduplicated.
    """
    m = np.asarray(basis_vecs, dtype=float).T
    n, k = m.shape
    r, _ = column_echelon(m, pivot_tol)
    found: dict[bytes, np.ndarray] = {}
    # first coefficient fixed to +1: x and -x are the same bisection
    block = 1 << 14
    total = 1 << (k - 1)
    for start in range(0, total, block):
        idx = np.arange(start, min(total, start + block))
        bits = (idx[:, None] >> np.arange(k - 1)) & 1
        coeffs = np.hstack([np.ones((len(idx), 1)), 1.0 - 2.0 * bits])
        xs = coeffs @ r.T
        ok = np.all(np.abs(np.abs(xs) - 1.0) <= round_tol, axis=1) & (np.abs(xs.sum(axis=1)) <= round_tol)
        for row in xs[ok]:
            y = np.where(row > 0, 1, -1).astype(np.int64)
            if y.sum() != 0 or np.max(np.abs(row - y)) > round_tol:
                continue
            y = canonical_sign(y)
            found.setdefault(y.tobytes(), y)
    return list(found.values())


def enumerate_bisections_multiplicity(
    g: Graph,
    d_best,
    k_cap: int = 16,
    h_hat: float | None = None,
    mult_tol: float = DEFAULT_MULT_TOL,
    cert_tol: float = CERT_TOL,
) -> list[np.ndarray]:
    """Certified optimal bisections hidden in a degenerate top eigenspace.

    Raises ``ValueError`` when the top eigenvalue is simple and
    :class:`EigenspaceTooLarge` when its multiplicity exceeds ``k_cap``.
    """
    value, spec = eval_g(g, d_best, mult_tol)
    if h_hat is None:
        h_hat = value
    k = spec.multiplicity
    if k < 2:
        raise ValueError("top eigenvalue is simple; use the median split")
    if k > k_cap:
        raise EigenspaceTooLarge(f"eigenspace of dimension {k} exceeds k_cap={k_cap}")
    out = [y for y in sign_combinations(spec.eigvecs) if cut_width(g, y) <= h_hat + cert_tol]
    return sorted(out, key=lambda y: tuple(-y))


# -- optimizer ---------------------------------------------------------------


def refine_bisection(g: Graph, y, max_swaps: int | None = None) -> np.ndarray:
    """Greedy pair swaps (Kernighan-Lin style) while they reduce the cut."""
    y = np.array(as_bisection(y, g.n))
    a = g.adjacency
    if g.m == 0:
        return canonical_sign(y)
    ext = correction_from_bisection(g, y).astype(float)  # cross minus same-side degree
    max_swaps = g.n if max_swaps is None else max_swaps
    for _ in range(max_swaps):
        plus = np.flatnonzero(y == 1)
        minus = np.flatnonzero(y == -1)
        gain = ext[plus][:, None] + ext[minus][None, :] - 2.0 * a[np.ix_(plus, minus)]
        i, j = np.unravel_index(int(np.argmax(gain)), gain.shape)
        if gain[i, j] <= 0.5:
            break
        u, v = plus[i], minus[j]
        y[u], y[v] = -1, 1
        ext = correction_from_bisection(g, y).astype(float)
    return canonical_sign(y)


@dataclass
class AlphaSearch:
    alpha: float
    d: np.ndarray
    mu: float  # top eigenvalue on the complement of span{1, y}
    value: float  # g at d


def _householder_drop(r: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Restrict ``r`` to the orthogonal complement of the unit vector ``v``."""
    size = len(v)
    e = np.zeros(size)
    e[-1] = 1.0
    w = v - e
    nw = np.linalg.norm(w)
    if nw < 1e-14:
        return r[:-1, :-1]
    w /= nw
    rw = r @ w
    wrw = float(w @ rw)
    h = r - 2.0 * np.outer(w, rw) - 2.0 * np.outer(rw, w) + 4.0 * wrw * np.outer(w, w)
    return h[:-1, :-1]


def _top_eigenvalue(c: np.ndarray) -> float:
    size = c.shape[0]
    if size == 0:
        return -math.inf
    if size <= 96:
        return float(np.linalg.eigvalsh(c)[-1])
    return float(scipy.linalg.eigh(c, subset_by_index=[size - 1, size - 1], eigvals_only=True, driver="evr")[0])


def alpha_line_search(g: Graph, y, basis: SubspaceBasis | None = None) -> AlphaSearch:
    """Best correction vector of the form ``d^(y) + alpha * y``.

    Along this line ``y`` is always an eigenvector of ``B_S`` with eigenvalue 0,
    so ``g = cut_width(y) - n * max(0, mu(alpha)) / 4`` where ``mu`` is the top
    eigenvalue on the complement of ``span{1, y}``; ``mu`` is convex in alpha
    and is minimized by bounded Brent search. When ``alpha = 0`` keeps at least
    half of the best spectral gap it is preferred.
    """
    y = as_bisection(y, g.n)
    n = g.n
    basis = basis or s_basis(n)
    dy = correction_from_bisection(g, y).astype(float)
    cw = cut_width(g, y)
    if n <= 2:
        return AlphaSearch(0.0, dy, -math.inf, float(cw))
    yr = basis.coords(y.astype(float))
    yr /= np.linalg.norm(yr)
    c0 = _householder_drop(basis.reduce(corrected_matrix(g, dy)), yr)
    c1 = _householder_drop(basis.reduce(np.diag(y.astype(float))), yr)

    def mu(alpha):
        return _top_eigenvalue(c0 + alpha * c1)

    bound = 4.0 * (float(g.degrees.max()) + 1.0) if g.m else 4.0
    res = scipy.optimize.minimize_scalar(mu, bounds=(-bound, bound), method="bounded", options={"xatol": 1e-10})
    alpha, best = float(res.x), float(res.fun)
    mu0 = mu(0.0)
    if mu0 <= 0.5 * min(best, 0.0) or mu0 <= best:
        alpha, best = 0.0, mu0
    d = dy + alpha * y
    lam = max(0.0, best)
    return AlphaSearch(alpha, d, best, cw - n * lam / 4.0)


@dataclass
class AscentResult:
    d_best: np.ndarray
    h_hat: float
    trace: list[TraceEntry]
    candidates: dict  # bytes -> (y, cut)
    iterations: int
    converged: bool


class _Tracker:
    def __init__(self, g: Graph, opts: SolveOptions, basis: SubspaceBasis):
        self.g, self.opts, self.basis = g, opts, basis
        self.best_val = -math.inf
        self.best_d = np.zeros(g.n)
        self.best_spec: SpectralResult | None = None
        self.candidates: dict[bytes, tuple[np.ndarray, int]] = {}
        self.polished: set[bytes] = set()
        self.trace: list[TraceEntry] = []

    def evaluate(self, d, step: float = 0.0, record: bool = True):
        val, spec = eval_g(self.g, d, self.opts.mult_tol, self.basis)
        if val > self.best_val:
            self.best_val, self.best_d, self.best_spec = val, np.array(d, dtype=float), spec
        if record:
            self.trace.append(TraceEntry(val, spec.lambda_max, step, self.best_val))
        return val, spec

    def best_cut(self) -> int:
        return min((c for _, c in self.candidates.values()), default=math.inf)

    def certified(self) -> bool:
        return self.best_cut() <= self.best_val + self.opts.cert_tol

    def offer(self, spec: SpectralResult) -> None:
        """Turn the eigenspace into candidate bisections and polish new ones."""
        ys = []
        if spec.multiplicity == 1:
            ys.append(extract_bisection(spec.top))
        else:
            if spec.multiplicity <= self.opts.k_cap:
                try:
                    ys.extend(sign_combinations(spec.eigvecs))
                except np.linalg.LinAlgError:
                    pass
            ys.extend(extract_bisection(v) for v in spec.eigvecs[: self.opts.k_cap])
        for y in ys:
            self._add(y)
            if self.opts.polish:
                self._add(refine_bisection(self.g, y))

    def _add(self, y) -> None:
        key = y.tobytes()
        if key not in self.candidates:
            self.candidates[key] = (y, cut_width(self.g, y))
        cut = self.candidates[key][1]
        near = cut <= self.best_val + self.opts.polish_gap * max(1.0, abs(self.best_val)) + 1.0
        if self.opts.polish and near and key not in self.polished:
            self.polished.add(key)
            ls = alpha_line_search(self.g, y, self.basis)
            if ls.value > self.best_val + self.opts.g_tol:
                self.evaluate(normalize_d(ls.d, 2.0 * self.g.m), record=False)


def maximize_g(g: Graph, opts: SolveOptions | None = None) -> AscentResult:
    """Projected supergradient ascent on the bound with best-iterate tracking.

    The returned ``h_hat`` is the largest bound value evaluated, a valid lower
    bound on the bisection width whether or not the ascent converged; the
    matching ``d_best`` is translated to sum ``2m``. Candidate bisections read
    off the eigenvectors along the way are refined and used for an exact
    search over ``d^(y) + alpha * y``; the ascent stops once one of them
    matches the bound.
    """
    opts = opts or SolveOptions()
    require_even(g.n)
    n = g.n
    basis = s_basis(n)
    tr = _Tracker(g, opts, basis)
    target = 2.0 * g.m
    step0 = opts.step0 or 2.0 * max(1.0, 2.0 * g.m / n)

    _, spec0 = tr.evaluate(np.full(n, target / n))
    tr.offer(spec0)
    guess = extract_bisection(spec0.top)
    val_guess, spec_guess = tr.evaluate(normalize_d(correction_from_bisection(g, guess), target))
    start, spec = (tr.best_d, tr.best_spec)
    rng = np.random.default_rng(opts.seed)

    iterations = 0
    converged = tr.certified()
    for restart in range(opts.restarts + 1):
        if converged:
            break
        d = np.array(start)
        if restart:
            d = normalize_d(d + rng.normal(scale=step0, size=n), target)
            _, spec = tr.evaluate(d)
        last_improve, mark = 0, tr.best_val
        for t in range(1, opts.max_iters + 1):
            iterations += 1
            grad = supergradient_g(g, d, spec)
            norm = np.linalg.norm(grad)
            if norm < 1e-14:
                converged = True
                break
            step = step0 / math.sqrt(t)
            d = d + step * grad / norm
            d = normalize_d(d, target)
            _, spec = tr.evaluate(d, step)
            if t % opts.polish_every == 0:
                tr.offer(spec)
            if tr.certified():
                converged = True
                break
            if tr.best_val > mark + opts.g_tol:
                mark, last_improve = tr.best_val, t
            elif t - last_improve >= opts.stall_iters:
                break
        start = tr.best_d
    if tr.best_spec is not None:
        tr.offer(tr.best_spec)
    return AscentResult(
        normalize_d(tr.best_d, target), tr.best_val, tr.trace, tr.candidates, iterations, converged or tr.certified()
    )


def _solve_pair(g: Graph) -> SolveReport:
    y = np.array([1, -1], dtype=np.int64)
    d = np.full(2, float(g.m))
    return SolveReport(float(g.m), d, 0.0, 1, [y], g.m, Status.CERTIFIED, 0)


def solve(g: Graph, opts: SolveOptions | None = None) -> SolveReport:
    """Maximize the bound, extract bisections and decide certification."""
    opts = opts or SolveOptions()
    require_even(g.n)
    if g.n == 2:
        return _solve_pair(g)
    t0 = time.perf_counter()
    asc = maximize_g(g, opts)
    h_hat, spec = eval_g(g, asc.d_best, opts.mult_tol)
    # the ascent tracked the max; re-evaluation can differ only by rounding
    h_hat = max(h_hat, asc.h_hat) if abs(h_hat - asc.h_hat) < 1e-9 else asc.h_hat
    k = spec.multiplicity
    diag: dict = {"converged": asc.converged, "gap": spec.gap if math.isfinite(spec.gap) else None}
    status = Status.FAIL
    if k == 1:
        bis = [extract_bisection(spec.top)]
    elif k <= opts.k_cap:
        bis = enumerate_bisections_multiplicity(g, asc.d_best, opts.k_cap, h_hat, opts.mult_tol, opts.cert_tol)
    else:
        bis = []
        diag["reason"] = "eigenspace too large"
    certified = [y for y in bis if cut_width(g, y) <= h_hat + opts.cert_tol]
    if certified:
        status, bis = Status.CERTIFIED, certified
    else:
        # nothing certifies: report the best bisection seen anywhere
        pool = list(bis) + [y for y, _ in asc.candidates.values()]
        if pool:
            bis = [min(pool, key=lambda y: cut_width(g, y))]
    best_cut = min(cut_width(g, y) for y in bis)
    diag["wall_ms"] = int(1000 * (time.perf_counter() - t0))
    return SolveReport(
        h_hat=h_hat,
        d_best=asc.d_best,
        lambda_at_best=spec.lambda_max,
        multiplicity=k,
        bisections=bis,
        best_cut=best_cut,
        status=status,
        iterations=asc.iterations,
        trace=asc.trace,
        diagnostics=diag,
    )
