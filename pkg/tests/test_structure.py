import math

import numpy as np
import pytest

from bisectcert import Graph, cut_width, gen_hypercube, hypercube_dimension_cut, solve
from bisectcert.fixtures import isolated_pair_fixture, lattice_fixture, path_fixture
from bisectcert.graph import MonotoneMove, MoveKind, apply_monotone_moves, gen_planted_bisection
from bisectcert.oracle import brute_force_bw
from bisectcert.solver import eval_g
from bisectcert.structure import (
    WitnessConditionError,
    analyze,
    balanced_same_neighbor_violations,
    check_eigenvector_lemma,
    correction_from_bisection,
    detect_isolated_pair,
    detect_lattice,
    detect_path_segment,
    disprove_tightness,
    path_segment_applies,
    recover_alpha,
    tight_update,
    witness_size_condition,
    witness_vector,
    witness_z_beta,
)
from conftest import random_bisection, random_graph


def test_correction_examples(p4, k44):
    d = correction_from_bisection(p4, [1, 1, -1, -1])
    assert d.tolist() == [-1, 0, 0, -1] and d.sum() == -2
    assert correction_from_bisection(Graph(6), [1, -1, 1, -1, 1, -1]).tolist() == [0] * 6
    g, y = k44
    assert correction_from_bisection(g, y).tolist() == [4] * 8
    with pytest.raises(ValueError):
        correction_from_bisection(p4, [1, -1])


def test_recover_alpha_examples(p4):
    y = np.array([1, 1, -1, -1])
    dy = correction_from_bisection(p4, y)
    a, r = recover_alpha(p4, y, dy + 3 * y + 5)
    assert a == pytest.approx(3, abs=1e-12) and r <= 1e-12
    a, r = recover_alpha(p4, y, dy)
    assert a == 0 and r == 0


def test_recover_alpha_on_certified_planted():
    inst = gen_planted_bisection(12, 0.9, 0.1, 4)
    rep = solve(inst.graph)
    orc = brute_force_bw(inst.graph)
    assert rep.certified and orc.count == 1
    _, resid = recover_alpha(inst.graph, orc.optimal_bisections[0], rep.d_best)
    assert resid <= 1e-5


def test_eigenvector_lemma_examples(p4):
    y = np.array([1, 1, -1, -1])
    assert check_eigenvector_lemma(p4, correction_from_bisection(p4, y), y) <= 1e-10
    h = gen_hypercube(3)
    for bit in range(3):
        assert check_eigenvector_lemma(h, -np.ones(8), hypercube_dimension_cut(3, bit)) <= 1e-10


def test_same_neighbor_examples(k44, two_k4):
    g, y = path_fixture()
    assert (4, 5) not in balanced_same_neighbor_violations(g, y)  # adjacent pair
    assert balanced_same_neighbor_violations(*k44) == []
    assert balanced_same_neighbor_violations(two_k4.graph, two_k4.planted) == []


def test_same_neighbor_detects_balanced_pair():
    # u=0 and w=3 each have one same-side and one cross neighbour, are not adjacent, different neighbourhoods
    g = Graph.from_edges(6, [(0, 1), (0, 4), (3, 5), (3, 2), (1, 2), (4, 5)])
    y = np.array([1, 1, 1, -1, -1, -1])
    assert (0, 3) in balanced_same_neighbor_violations(g, y)


def test_path_detector_examples():
    g, y = path_fixture()
    assert detect_path_segment(g, y) == [(3, 4, 5, 6)]
    assert path_segment_applies(g)
    h = gen_hypercube(3)
    assert detect_path_segment(h, hypercube_dimension_cut(3, 0)) == []
    c4 = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 3)])
    assert len(detect_path_segment(c4, [1, 1, -1, -1])) == 2
    assert not path_segment_applies(c4)


def test_lattice_detector_examples():
    g, y = lattice_fixture()
    assert detect_lattice(g, y, 2) == [((0, 1), (2, 3))]
    cyc = Graph.from_edges(8, [(i, (i + 1) % 8) for i in range(8)])
    assert detect_lattice(cyc, [1, 1, 1, 1, -1, -1, -1, -1], 2) == []
    pg, py = path_fixture()
    assert detect_lattice(pg, py, 1) == [((4,), (5,))]
    with pytest.raises(ValueError):
        detect_lattice(g, y, 5)


def test_isolated_pair_examples():
    g, _ = isolated_pair_fixture()
    assert detect_isolated_pair(g)
    assert not detect_isolated_pair(Graph.from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 3)]))
    assert detect_isolated_pair(Graph(4))
    assert solve(Graph(4)).certified


def test_witness_formulas():
    z, beta = witness_z_beta(3, 0, 20)
    assert z == pytest.approx(20 / 3) and beta == pytest.approx(3 / 20)
    k, delta, l = 3, 1, 20
    z, beta = witness_z_beta(k, delta, l)
    assert z == pytest.approx((140 + 2 * math.sqrt(5040)) / 28)
    # the defining equation: the vector sums to zero
    assert -l + (2 * k + delta) * z - math.sqrt((delta + l) * (delta * z * z + l)) == pytest.approx(0, abs=1e-9)
    assert z > 4 and beta < 1 / 3
    with pytest.raises(WitnessConditionError):
        witness_z_beta(2, 1, 40)
    assert witness_size_condition(2, 0, 5) and "3k < l" in witness_size_condition(2, 0, 5)
    assert witness_size_condition(1, 0, 4) is None


def test_witness_path_fixture():
    g, y = path_fixture()
    params, x = witness_vector(g, y, [4], [5])
    assert (params.k, params.delta, params.l) == (1, 0, 4)
    assert params.z == pytest.approx(4) and params.beta == pytest.approx(0.25)
    assert abs(x.sum()) <= 1e-9
    excess, disproved = disprove_tightness(g, y, x)
    assert disproved and excess == pytest.approx(14.0)


def test_witness_errors():
    g, y = path_fixture()
    with pytest.raises(WitnessConditionError, match="not on side"):
        witness_vector(g, y, [5], [4])
    with pytest.raises(WitnessConditionError, match="across the cut"):
        witness_vector(g, y, [0], [5])
    h = gen_hypercube(3)
    yh = hypercube_dimension_cut(3, 0)
    plus = [v for v in range(8) if yh[v] == 1]
    minus = [v for v in range(8) if yh[v] == -1]
    with pytest.raises(WitnessConditionError, match="size condition"):
        witness_vector(h, yh, plus, minus)


def test_witness_swaps_sides():
    # larger set on the -1 side gets swapped internally
    n, h = 48, 24
    cp, cm = [0, 1, 2], [24, 25, 26, 27]
    edges = [(u, w) for u in cp for w in cm]
    edges += [(v, 3 + v) for v in cp] + [(w, w + 4) for w in cm]
    edges += [(i, i + 1) for i in range(3, h - 1)] + [(i, i + 1) for i in range(h + 4, n - 1)]
    g = Graph.from_edges(n, edges)
    y = np.array([1] * h + [-1] * h)
    params, x = witness_vector(g, y, cp, cm)
    assert params.swapped and params.C_plus == (0, 1, 2) and params.C_minus == (24, 25, 26, 27)
    assert (params.k, params.delta, params.l) == (3, 1, 20)
    assert abs(x.sum()) <= 1e-9
    sq = x * x
    assert abs(sq[y == 1].sum() - sq[y == -1].sum()) <= 1e-9 * g.n * max(1, params.z**2)


def test_disprove_rejects_unbalanced():
    g, y = path_fixture()
    with pytest.raises(ValueError):
        disprove_tightness(g, y, np.ones(10))


def test_tight_update_p4():
    g = Graph.from_edges(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 2), (3, 5)])
    y = np.array([1, 1, 1, -1, -1, -1])
    rep = solve(g)
    assert rep.certified and rep.best_cut == 1
    moves = [MonotoneMove(MoveKind.REMOVE_CUT_EDGE, 2, 3)]
    d2, bw2 = tight_update(g, y, rep.d_best, moves, rep.best_cut)
    g2 = apply_monotone_moves(g, y, moves)
    assert bw2 == 0 and eval_g(g2, d2)[0] == pytest.approx(0, abs=1e-8)


def test_analyze_report_json():
    g, y = path_fixture()
    rep = analyze(g, y, solve(g).d_best)
    doc = rep.to_json()
    kinds = {v["kind"] for v in doc["violations"]}
    assert "path_segment" in kinds
    assert doc["eigen_residual"] >= 0 and doc["off_span_residual"] >= 0


def test_sum_identity_random():
    rng = np.random.default_rng(9)
    for _ in range(50):
        n = int(rng.choice([4, 8, 12]))
        g = random_graph(n, float(rng.uniform(0.1, 0.9)), int(rng.integers(1 << 30)))
        y = random_bisection(n, rng)
        assert correction_from_bisection(g, y).sum() == 4 * cut_width(g, y) - 2 * g.m
