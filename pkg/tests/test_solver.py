import math

import numpy as np
import pytest

from bisectcert import Graph, SolveOptions, Status, cut_width, gen_hypercube, hypercube_dimension_cut, solve
from bisectcert.graph import canonical_sign
from bisectcert.oracle import brute_force_bw
from bisectcert.solver import (
    EigenspaceTooLarge,
    alpha_line_search,
    certify,
    column_echelon,
    enumerate_bisections_multiplicity,
    eval_f,
    eval_g,
    extract_bisection,
    maximize_g,
    normalize_d,
    refine_bisection,
    sign_combinations,
    supergradient_g,
)
from bisectcert.structure import correction_from_bisection
from conftest import random_bisection, random_graph


def test_eval_f_examples(p4):
    assert eval_f(p4, np.zeros(4), [1, 1, -1, -1]) == 1
    assert eval_f(Graph(4), np.ones(4), np.zeros(4)) == -4
    rng = np.random.default_rng(0)
    for _ in range(20):
        g = random_graph(10, 0.4, int(rng.integers(1000)))
        y = random_bisection(10, rng)
        assert eval_f(g, rng.normal(size=10), y) == pytest.approx(cut_width(g, y), abs=1e-12)


def test_eval_g_examples(p4):
    assert eval_g(gen_hypercube(3), -np.ones(8))[0] == pytest.approx(4, abs=1e-12)
    assert eval_g(Graph(6), np.zeros(6))[0] == pytest.approx(0, abs=1e-12)
    y = np.array([1, 1, -1, -1])
    assert eval_g(p4, correction_from_bisection(p4, y))[0] == pytest.approx(1, abs=1e-12)


def test_supergradient_sums_to_zero():
    g = random_graph(10, 0.4, 2)
    sg = supergradient_g(g, np.zeros(10))
    assert abs(sg.sum()) < 1e-12
    assert abs(supergradient_g(Graph(6), np.zeros(6)).sum()) < 1e-12


def test_normalize_d():
    assert np.array_equal(normalize_d(np.zeros(4), 8), np.full(4, 2.0))
    d = np.array([1.0, 2.0, 3.0])
    assert np.allclose(normalize_d(d, 6.0), d)
    g = random_graph(10, 0.5, 1)
    d = np.random.default_rng(1).normal(size=10)
    assert eval_g(g, normalize_d(d, 17.0))[0] == pytest.approx(eval_g(g, d)[0], abs=1e-9)


@pytest.mark.parametrize(
    "x, expected",
    [((0.9, 0.2, -0.3, -0.8), (1, 1, -1, -1)), ((1, 1, 1, 1), (1, 1, -1, -1)), ((-1, 1, -1, 1), (1, -1, 1, -1))],
)
def test_extract_bisection(x, expected):
    assert tuple(extract_bisection(np.array(x, dtype=float))) == expected


def test_extract_bisection_ties_lowest_index_demoted():
    y = extract_bisection(np.array([0.0, 0.0, 0.0, 0.0, 1.0, -1.0]))
    # indices 0..3 tie at the median; the two surplus ones (0 and 1) are demoted
    assert tuple(y) == (1, 1, -1, -1, -1, 1)


def test_certify_examples(p4):
    h = gen_hypercube(3)
    x = hypercube_dimension_cut(3, 0)
    assert certify(h, 4.0, x) is Status.CERTIFIED
    assert certify(h, 3.2, x) is Status.FAIL
    assert certify(h, 3.9999999, x) is Status.CERTIFIED


def test_maximize_examples(p4, two_k4):
    asc = maximize_g(gen_hypercube(4))
    assert asc.h_hat >= 8 - 1e-6
    asc = maximize_g(p4)
    assert 1 - 1e-6 <= asc.h_hat <= 1 + 1e-9
    assert asc.d_best.sum() == pytest.approx(2 * p4.m)
    rep = solve(two_k4.graph)
    assert rep.h_hat >= -1e-6 and rep.certified and rep.best_cut == 0


def test_trace_best_is_monotone():
    asc = maximize_g(random_graph(20, 0.3, 4), SolveOptions(max_iters=60))
    best = [t.best for t in asc.trace]
    assert all(b2 >= b1 for b1, b2 in zip(best, best[1:]))
    assert asc.h_hat >= max(t.value for t in asc.trace)


def test_solve_examples(p4):
    rep = solve(gen_hypercube(3))
    assert rep.certified and rep.best_cut == 4 and rep.multiplicity == 3
    cuts = {tuple(canonical_sign(hypercube_dimension_cut(3, b))) for b in range(3)}
    assert {tuple(y) for y in rep.bisections} == cuts
    rep = solve(p4)
    assert rep.certified and rep.best_cut == 1
    assert rep.h_hat <= rep.best_cut + 1e-9


def test_solve_n2():
    rep = solve(Graph.from_edges(2, [(0, 1)]))
    assert rep.certified and rep.best_cut == 1 and rep.h_hat == 1
    assert solve(Graph(2)).best_cut == 0


def test_solve_rejects_odd():
    with pytest.raises(ValueError):
        solve(Graph(5))


def test_report_json(p4):
    doc = solve(p4).to_json()
    for key in ("h_hat", "best_cut", "status", "multiplicity", "iterations", "bisections", "d_best"):
        assert key in doc
    assert doc["status"] == "CertifiedOptimum"


def test_enumeration_examples():
    h = gen_hypercube(3)
    got = enumerate_bisections_multiplicity(h, -np.ones(8), k_cap=16)
    assert len(got) == 3 and all(cut_width(h, y) == 4 for y in got)
    h4 = gen_hypercube(4)
    got = enumerate_bisections_multiplicity(h4, -2 * np.ones(16), k_cap=16)
    assert len(got) == 4 and all(cut_width(h4, y) == 8 for y in got)
    with pytest.raises(ValueError):
        enumerate_bisections_multiplicity(Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)]), np.array([-1.0, 0, 0, -1]))
    with pytest.raises(EigenspaceTooLarge):
        enumerate_bisections_multiplicity(gen_hypercube(5), np.zeros(32), k_cap=4)


def test_empty_graph_enumeration():
    rep = solve(Graph(4))
    assert rep.certified and rep.best_cut == 0 and len(rep.bisections) == 3


def test_k_cap_exceeded_fails():
    rep = solve(gen_hypercube(5), SolveOptions(k_cap=3))
    assert rep.status is Status.FAIL
    assert rep.diagnostics["reason"] == "eigenspace too large"
    assert rep.h_hat == pytest.approx(16, abs=1e-9)


def test_column_echelon_identity_rows():
    rng = np.random.default_rng(0)
    m = rng.normal(size=(7, 3))
    r, piv = column_echelon(m)
    assert np.allclose(r[piv], np.eye(3))
    # same column space
    assert np.linalg.matrix_rank(np.hstack([m, r]), tol=1e-9) == 3
    with pytest.raises(np.linalg.LinAlgError):
        column_echelon(np.hstack([m[:, :2], m[:, :1]]))


def test_sign_combinations_finds_planted_vectors():
    rng = np.random.default_rng(3)
    ys = [random_bisection(10, rng) for _ in range(3)]
    mix = rng.normal(size=(3, 3)) @ np.array(ys, dtype=float)
    got = {tuple(v) for v in sign_combinations(mix)}
    for y in ys:
        assert tuple(canonical_sign(y)) in got


def test_alpha_line_search_is_exact_on_p4(p4):
    ls = alpha_line_search(p4, [1, 1, -1, -1])
    assert ls.value == pytest.approx(1.0, abs=1e-12)
    assert ls.mu <= 0


def test_refine_never_worse():
    rng = np.random.default_rng(5)
    for _ in range(10):
        g = random_graph(16, 0.3, int(rng.integers(10_000)))
        y = random_bisection(16, rng)
        assert cut_width(g, refine_bisection(g, y)) <= cut_width(g, y)


def test_options_validation():
    with pytest.raises(ValueError):
        SolveOptions(max_iters=0)
    with pytest.raises(ValueError):
        SolveOptions(k_cap=25)


@pytest.mark.parametrize("seed", range(12))
def test_certified_matches_oracle(seed):
    g = random_graph(10, 0.5, 100 + seed)
    rep = solve(g)
    orc = brute_force_bw(g)
    assert rep.h_hat <= orc.bw + 1e-9
    if rep.certified:
        assert rep.best_cut == orc.bw
        assert {tuple(y) for y in rep.bisections} == {tuple(y) for y in orc.optimal_bisections}
