"""Eigen-machinery on the zero-sum subspace S = {x : sum(x) = 0}.

All eigenproblems for ``B_S = P B P`` (``P = I - J/n``) are solved in an
explicit orthonormal Helmert basis of S, so the spurious eigenvalue 0 along
the all-ones direction never enters the spectrum or the multiplicity count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .graph import Graph

DEFAULT_TOL = 1e-11
DEFAULT_MULT_TOL = 1e-7
# below this size a full decomposition is cheaper than a partial one
_FULL_BELOW = 96
_PROBE = 12


class EigenError(ArithmeticError):
    def __init__(self, message: str, residual: float = math.nan):
        self.residual = residual
        super().__init__(message)


class SubspaceBasis:
    """Helmert basis of S.

    Column ``k-1`` (``k = 1..n-1``) is ``(1, ..., 1, -k, 0, ..., 0) / sqrt(k(k+1))``
    with ``k`` leading ones. Products with the basis are done with cumulative
    sums, so :meth:`reduce` costs O(n^2) instead of two dense matrix products.
    """

    def __init__(self, n: int):
        if n < 2:
            raise ValueError(f"subspace basis needs n >= 2, got {n}")
        self.n = n
        k = np.arange(1, n, dtype=float)
        self._scale = 1.0 / np.sqrt(k * (k + 1.0))
        self._k = k

    @property
    def matrix(self) -> np.ndarray:
        """Dense n x (n-1) matrix whose columns are the basis vectors."""
        return self.lift(np.eye(self.n - 1))

    @property
    def vectors(self) -> np.ndarray:
        return self.matrix.T

    def coords(self, x: np.ndarray) -> np.ndarray:
        """``Q^T x`` along the first axis of ``x``."""
        x = np.asarray(x, dtype=float)
        head = np.cumsum(x[:-1], axis=0)
        tail = x[1:]
        shape = (-1,) + (1,) * (x.ndim - 1)
        return (head - self._k.reshape(shape) * tail) * self._scale.reshape(shape)

    def lift(self, u: np.ndarray) -> np.ndarray:
        """``Q u`` along the first axis of ``u``."""
        u = np.asarray(u, dtype=float)
        shape = (-1,) + (1,) * (u.ndim - 1)
        w = u * self._scale.reshape(shape)
        out = np.zeros((self.n,) + u.shape[1:])
        # entry j collects w_k for every k > j, minus j * w_j
        rev = np.cumsum(w[::-1], axis=0)[::-1]
        out[:-1] += rev
        out[1:] -= self._k.reshape(shape) * w
        return out

    def reduce(self, m: np.ndarray) -> np.ndarray:
        """``Q^T M Q`` for a symmetric n x n matrix ``M``."""
        t = self.coords(m)
        r = self.coords(t.T)
        return 0.5 * (r + r.T)


_BASES: dict[int, SubspaceBasis] = {}


def s_basis(n: int) -> SubspaceBasis:
    if n not in _BASES:
        _BASES[n] = SubspaceBasis(n)
    return _BASES[n]


def corrected_matrix(g: Graph, d) -> np.ndarray:
    """``A + diag(d)`` as a fresh dense array."""
    d = np.asarray(d, dtype=float)
    if d.shape != (g.n,):
        raise ValueError(f"correction vector has shape {d.shape}, expected ({g.n},)")
    b = np.array(g.adjacency)
    b[np.diag_indices(g.n)] += d
    return b


def reduced_matrix(g: Graph, d, basis: SubspaceBasis | None = None) -> np.ndarray:
    """Representation of ``B_S`` on S in the given basis: ``Q^T (A + diag d) Q``."""
    basis = basis or s_basis(g.n)
    if basis.n != g.n:
        raise ValueError(f"basis dimension {basis.n} does not match n={g.n}")
    return basis.reduce(corrected_matrix(g, d))


def eig_sym(mat: np.ndarray, tol: float = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Full eigendecomposition of a symmetric matrix, eigenvalues ascending.

    Backed by LAPACK ``syevd`` (Householder tridiagonalization followed by an
    implicit QL/QR or divide-and-conquer stage).
    """
    mat = np.asarray(mat, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {mat.shape}")
    scale = max(1.0, float(np.max(np.abs(mat)))) if mat.size else 1.0
    if mat.size and np.max(np.abs(mat - mat.T)) > 1e-12 * scale:
        raise ValueError("matrix is not symmetric")
    try:
        w, v = np.linalg.eigh(mat)
    except np.linalg.LinAlgError as exc:
        raise EigenError(f"eigensolver did not converge: {exc}") from exc
    return w, v


@dataclass
class SpectralResult:
    lambda_max: float
    eigvecs: np.ndarray  # k x n, rows unit-norm and zero-sum
    multiplicity: int
    residual: float
    gap: float
    reduced_vecs: np.ndarray  # k x (n-1), coordinates in the Helmert basis

    @property
    def top(self) -> np.ndarray:
        return self.eigvecs[0]


def _top_block(r: np.ndarray, mult_tol: float) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and vectors covering the top cluster plus one more."""
    size = r.shape[0]
    if size <= _FULL_BELOW:
        w, v = eig_sym(r)
        return w[::-1], v[:, ::-1]
    probe = _PROBE
    while True:
        lo = max(0, size - probe)
        try:
            w, v = scipy.linalg.eigh(r, subset_by_index=[lo, size - 1], driver="evr")
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise EigenError(f"eigensolver did not converge: {exc}") from exc
        w, v = w[::-1], v[:, ::-1]
        thresh = mult_tol * max(1.0, abs(w[0]))
        if lo == 0 or np.any(w[0] - w > thresh):
            return w, v
        probe *= 2


def top_eigpair_S(g: Graph, d, mult_tol: float = DEFAULT_MULT_TOL, basis: SubspaceBasis | None = None) -> SpectralResult:
    """Largest eigenvalue of ``(A + diag d)_S`` restricted to S, with its eigenspace."""
    basis = basis or s_basis(g.n)
    r = reduced_matrix(g, d, basis)
    return top_eigpair_reduced(r, basis, mult_tol)


def top_eigpair_reduced(r: np.ndarray, basis: SubspaceBasis, mult_tol: float = DEFAULT_MULT_TOL) -> SpectralResult:
    w, v = _top_block(r, mult_tol)
    lam = float(w[0])
    thresh = mult_tol * max(1.0, abs(lam))
    in_cluster = (lam - w) <= thresh
    k = int(np.count_nonzero(in_cluster))
    gap = float(lam - w[k]) if k < len(w) else math.inf
    u = v[:, :k]
    res = float(np.max(np.linalg.norm(r @ u - u * w[:k], axis=0)))
    vecs = basis.lift(u).T
    return SpectralResult(lam, vecs, k, res, gap, u.T)


def lambda_S(g: Graph, d, basis: SubspaceBasis | None = None) -> float:
    """Only the largest eigenvalue of ``B_S`` on S."""
    basis = basis or s_basis(g.n)
    r = reduced_matrix(g, d, basis)
    size = r.shape[0]
    if size <= _FULL_BELOW:
        return float(np.linalg.eigvalsh(r)[-1])
    return float(scipy.linalg.eigh(r, subset_by_index=[size - 1, size - 1], eigvals_only=True, driver="evr")[0])


def spectrum_S(g: Graph, d, basis: SubspaceBasis | None = None) -> np.ndarray:
    """All n-1 eigenvalues of ``B_S`` on S, ascending."""
    return eig_sym(reduced_matrix(g, d, basis))[0]
