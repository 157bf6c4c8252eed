import numpy as np
import pytest

from bisectcert import Graph, gen_hypercube
from bisectcert.spectral import SubspaceBasis, eig_sym, lambda_S, spectrum_S, top_eigpair_S
from conftest import random_graph


@pytest.mark.parametrize("n", [2, 3, 8, 31])
def test_basis_orthonormal_and_zero_sum(n):
    q = SubspaceBasis(n).matrix
    assert q.shape == (n, n - 1)
    assert np.allclose(q.T @ q, np.eye(n - 1), atol=1e-13)
    assert np.allclose(q.sum(axis=0), 0, atol=1e-13)


def test_basis_fast_products_match_dense():
    rng = np.random.default_rng(0)
    b = SubspaceBasis(9)
    q = b.matrix
    x = rng.normal(size=(9, 3))
    u = rng.normal(size=8)
    m = rng.normal(size=(9, 9))
    m = m + m.T
    assert np.allclose(b.coords(x), q.T @ x)
    assert np.allclose(b.lift(u), q @ u)
    assert np.allclose(b.reduce(m), q.T @ m @ q)


def _projected_spectrum(g, d):
    n = g.n
    p = np.eye(n) - np.ones((n, n)) / n
    return np.sort(np.linalg.eigvalsh(p @ (g.adjacency + np.diag(d)) @ p))


@pytest.mark.parametrize("seed", range(5))
def test_top_eigenvalue_matches_projected_matrix(seed):
    g = random_graph(12, 0.4, seed)
    d = np.random.default_rng(seed).normal(size=12)
    full = _projected_spectrum(g, d)
    sub = spectrum_S(g, d)
    # the projected matrix has the extra eigenvalue 0 along the ones vector
    merged = np.sort(np.append(sub, 0.0))
    assert np.allclose(merged, full, atol=1e-10)
    res = top_eigpair_S(g, d)
    assert res.lambda_max == pytest.approx(sub[-1], abs=1e-12)
    assert res.residual < 1e-10
    assert abs(res.top.sum()) < 1e-12 and np.linalg.norm(res.top) == pytest.approx(1.0)


def test_characteristic_polynomial_oracle():
    # the roots of det(tI - Q^T B Q) are the eigenvalues on S
    g = Graph.from_edges(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 5), (0, 3)])
    d = np.array([0.5, -1.0, 0.0, 2.0, 0.3, -0.2])
    r = SubspaceBasis(6).reduce(g.adjacency + np.diag(d))
    roots = np.sort(np.roots(np.poly(r)).real)
    assert np.allclose(roots, spectrum_S(g, d), atol=1e-8)


def test_hypercube_multiplicity():
    h = gen_hypercube(3)
    res = top_eigpair_S(h, -np.ones(8))
    assert res.lambda_max == pytest.approx(0.0, abs=1e-12)
    assert res.multiplicity == 3
    assert res.eigvecs.shape == (3, 8)
    assert np.allclose(res.eigvecs @ res.eigvecs.T, np.eye(3), atol=1e-12)


def test_partial_solver_path_large_n():
    g = random_graph(150, 0.05, 3)
    d = np.random.default_rng(1).normal(size=150)
    res = top_eigpair_S(g, d)
    assert res.lambda_max == pytest.approx(spectrum_S(g, d)[-1], abs=1e-9)
    assert lambda_S(g, d) == pytest.approx(res.lambda_max, abs=1e-9)
    h = gen_hypercube(7)
    assert top_eigpair_S(h, np.zeros(128)).multiplicity == 7


def test_eig_sym_rejects_asymmetric():
    with pytest.raises(ValueError):
        eig_sym(np.array([[0.0, 1.0], [0.0, 0.0]]))
