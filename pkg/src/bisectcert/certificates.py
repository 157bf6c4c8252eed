"""Explicit feasible points for the semidefinite formulations of the bound.

No SDP solver is involved: each certificate is assembled from a correction
vector (or a bisection) and its constraint is verified by an eigenvalue
computation.

* :func:`build_primal_cert` gives ``(z, d)`` with ``zI - P(A + diag d)P >= 0``;
  its value ``m/2 - (nz - sum d)/4`` equals the bound at ``d``.
* :func:`build_rank_one_point` gives ``Y = y y^T``, feasible for the
  relaxation ``min sum_E (1 - Y_ij)/2`` over unit-diagonal, zero-sum PSD ``Y``.
* :func:`build_fk_dual_cert` gives ``(x, x0)`` with ``-A - x0 J - diag x >= 0``
  and objective ``m/2 + sum(x)/4``, which bounds that relaxation from below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.optimize

from .graph import Graph, as_bisection, cut_width
from .solver import normalize_d
from .spectral import corrected_matrix, eig_sym, lambda_S, s_basis

PSD_TOL = 1e-8
PSD_SLACK = 1e-9


class CertificateError(ArithmeticError):
    pass


@dataclass
class PrimalCert:
    z: float
    d: np.ndarray
    min_eig_constraint: float
    objective: float
    h_equiv: float

    def to_json(self) -> dict:
        return {
            "z": self.z,
            "d": [float(v) for v in self.d],
            "min_eig_constraint": self.min_eig_constraint,
            "objective": self.objective,
            "h_equiv": self.h_equiv,
        }


@dataclass
class RankOnePoint:
    y_source: np.ndarray
    hY: int

    @property
    def Y(self) -> np.ndarray:
        y = self.y_source.astype(float)
        return np.outer(y, y)

    def to_json(self) -> dict:
        return {"y_source": [int(v) for v in self.y_source], "hY": self.hY, "diag_ones": True, "zero_sum": True}


@dataclass
class FkDualCert:
    x: np.ndarray
    x0: float
    min_eig_M: float
    objective: float

    def to_json(self) -> dict:
        return {"x": [float(v) for v in self.x], "x0": self.x0, "min_eig_M": self.min_eig_M, "objective": self.objective}


def primal_constraint_matrix(g: Graph, z: float, d) -> np.ndarray:
    """``zI - P (A + diag d) P`` written out term by term."""
    n = g.n
    a = g.adjacency
    d = np.asarray(d, dtype=float)
    ones = np.ones(n)
    j = np.ones((n, n))
    deg = a.sum(axis=1)
    return (
        z * np.eye(n)
        - a
        + (np.outer(ones, deg) + np.outer(deg, ones)) / n
        - a.sum() * j / n**2
        - np.diag(d)
        + (np.outer(ones, d) + np.outer(d, ones)) / n
        - d.sum() * j / n**2
    )


def build_primal_cert(g: Graph, d_star, slack: float = PSD_SLACK, psd_tol: float = PSD_TOL) -> PrimalCert:
    """Primal point ``(z, d)`` whose value matches the bound at ``d_star``.

    ``d`` is ``d_star`` shifted to sum ``2m``, which does not change the bound
    and makes the top eigenvalue on S nonnegative, so ``z`` just above it
    covers the all-ones direction (eigenvalue 0) as well.
    """
    d = normalize_d(d_star, 2.0 * g.m)
    lam = lambda_S(g, d)
    z = max(lam, 0.0) + slack
    w, _ = eig_sym(primal_constraint_matrix(g, z, d))
    min_eig = float(w[0])
    if min_eig < -psd_tol:
        raise CertificateError(f"primal constraint matrix not PSD: smallest eigenvalue {min_eig:.3e}")
    objective = g.n * z - float(d.sum())
    return PrimalCert(z, d, min_eig, objective, g.m / 2.0 - objective / 4.0)


def build_rank_one_point(y, g: Graph) -> RankOnePoint:
    y = as_bisection(y, g.n)
    return RankOnePoint(y, cut_width(g, y))


class _BorderedForm:
    """``M = K - x0 J`` in the orthonormal basis ``[1/sqrt(n), Q]``.

    There it reads ``[[a - n x0, b^T], [b, C]]``; ``C`` is diagonalized once,
    so both the PSD test (a Schur complement) and the smallest eigenvalue (a
    secular equation) cost O(n) per ``x0``.
    """

    def __init__(self, g: Graph, shift: float, d: np.ndarray):
        n = g.n
        basis = s_basis(n)
        k = -corrected_matrix(g, d)
        k[np.diag_indices(n)] += shift
        u0 = np.full(n, 1.0 / math.sqrt(n))
        ku0 = k @ u0
        self.n = n
        self.a0 = float(u0 @ ku0)
        c = basis.reduce(k)
        self.c, v = eig_sym(c)
        self.bt2 = (v.T @ basis.coords(ku0)) ** 2

    def feasible(self, x0: float, tau: float) -> bool:
        cs = self.c + tau
        if cs[0] <= 0:
            return False
        return self.a0 - self.n * x0 + tau - float(np.sum(self.bt2 / cs)) >= 0

    def min_eig(self, x0: float) -> float:
        a = self.a0 - self.n * x0
        cmin = float(self.c[0])

        def f(t):
            return a - t - float(np.sum(self.bt2 / (self.c - t)))

        hi = cmin - 1e-12 * max(1.0, abs(cmin))
        if f(hi) >= 0:
            return cmin
        lo = min(a, cmin) - math.sqrt(float(self.bt2.sum())) - 1.0
        return float(scipy.optimize.brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps))


def build_fk_dual_cert(
    g: Graph, d_star, eps: float | None = None, psd_tol: float = PSD_TOL, doublings: int = 60, bisections: int = 30
) -> FkDualCert:
    """Dual point ``x = d_star - (lambda_S + eps) * 1`` with a feasible ``x0``.

    The objective is the bound at ``d_star`` minus ``n*eps/4``. The small
    ``eps`` makes the block on S strictly positive so that a finite ``x0`` always
    exists. ``x0`` starts at 0 and doubles downwards until the constraint holds,
    then bisection finds the largest feasible value.
    """
    d = np.asarray(d_star, dtype=float)
    n = g.n
    if eps is None:
        eps = min(1e-8, 1e-6 / n)
    lam = lambda_S(g, d)
    shift = lam + eps
    x = d - shift
    form = _BorderedForm(g, shift, d)
    psd_tol = 0.5 * psd_tol  # aim inside the tolerance so the reported eigenvalue clears it
    if form.feasible(0.0, psd_tol):
        lo = 0.0
    else:
        hi, lo = 0.0, None
        step = 1.0
        for _ in range(doublings):
            if form.feasible(-step, psd_tol):
                lo = -step
                break
            hi = -step
            step *= 2.0
        if lo is None:
            raise CertificateError(
                f"no feasible x0 down to {-step / 2:.3e}; smallest eigenvalue there {form.min_eig(-step / 2):.3e}"
            )
        for _ in range(bisections):
            mid = 0.5 * (lo + hi)
            if form.feasible(mid, psd_tol):
                lo = mid
            else:
                hi = mid
    min_eig = form.min_eig(lo)
    return FkDualCert(x, lo, min_eig, g.m / 2.0 + float(x.sum()) / 4.0)


def duality_gap(primal_h: float, rank_one: RankOnePoint) -> float:
    return rank_one.hY - primal_h


def psd_row_sum_check(y_like, tol: float = 1e-9, psd_tol: float = PSD_TOL) -> tuple[bool, bool]:
    """Row sums of a PSD matrix with (near) zero total sum are (near) zero.

    Writing ``Y`` as a Gram matrix of vectors ``v_i``, row ``i`` sums to
    ``<v_i, sum_j v_j>`` and ``|sum_j v_j|^2`` is the total sum, so each row sum
    is at most ``sqrt(Y_ii * total)`` in magnitude. Returns ``(ok, applicable)``;
    when the total exceeds ``tol`` the check is vacuous.
    """
    if isinstance(y_like, RankOnePoint):
        y = y_like.y_source.astype(float)
        rows = y * y.sum()
        total = float(y.sum()) ** 2
        diag = y * y
    else:
        mat = np.asarray(y_like, dtype=float)
        w, _ = eig_sym(mat)
        if w[0] < -psd_tol:
            raise ValueError(f"matrix is not PSD: smallest eigenvalue {w[0]:.3e}")
        rows = mat.sum(axis=1)
        total = float(rows.sum())
        diag = np.diag(mat)
    if total > tol:
        return True, False
    bound = np.sqrt(np.maximum(diag, 0.0) * max(total, 0.0)) + tol
    return bool(np.all(np.abs(rows) <= bound)), True
