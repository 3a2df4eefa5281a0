from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hyperrips.cayley import build_ball
from hyperrips.groups import free_abelian, free_group, free_product, infinite_dihedral, symmetric_group
from hyperrips.hyperbolicity import (Budget, check_delta, delta_of_ball, delta_of_matrix, naive_delta, pruned_delta,
                                     quadruple_defect)
from oracles import brute_delta2, graph_distance_matrix


@st.composite
def connected_graphs(draw, max_n=14):
    n = draw(st.integers(4, max_n))
    edges = [(i, draw(st.integers(0, i - 1))) for i in range(1, n)]  # random spanning tree
    extra = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=2 * n))
    edges += [(u, v) for u, v in extra if u != v]
    return graph_distance_matrix(n, edges)


@given(connected_graphs())
def test_pruned_and_naive_match_brute_force(D):
    truth = brute_delta2(D)
    assert naive_delta(D)[0] == truth
    best, w, _, exhaustive = pruned_delta(D)
    assert exhaustive and best == truth
    if truth:
        assert 2 * quadruple_defect(lambda i, j: D[i][j], *w) == truth


@given(connected_graphs(), st.integers(2, 5))
def test_parallel_scan_is_deterministic(D, workers):
    a = pruned_delta(D, workers=workers)
    b = pruned_delta(D, workers=workers)
    assert a == b and a[0] == pruned_delta(D)[0]


@pytest.mark.parametrize("n", range(4, 13))
def test_cycle_graphs(n):
    D = graph_distance_matrix(n, [(i, (i + 1) % n) for i in range(n)])
    assert pruned_delta(D)[0] == brute_delta2(D)


def test_trees_are_zero_hyperbolic():
    rng = np.random.default_rng(3)
    for _ in range(5):
        n = 30
        D = graph_distance_matrix(n, [(i, int(rng.integers(0, i))) for i in range(1, n)])
        assert delta_of_matrix(D).delta == 0


@pytest.mark.parametrize("o,radius,expected", [
    (free_group(2), 3, 0),
    (infinite_dihedral(), 10, 0),
    (free_product(2, 3), 5, 0),  # Cayley graph is a tree of triangles
    (symmetric_group(3), 3, 1),  # the hexagon
    (symmetric_group(4), 6, 3),
    (free_abelian(2), 2, 2),
])
def test_group_values(o, radius, expected):
    ball = build_ball(o, radius)
    rep = delta_of_ball(ball)
    assert rep.delta == expected and rep.exhaustive
    assert 2 * expected == brute_delta2(ball.distance_matrix()) if len(ball.vertices) <= 40 else True
    d = rep.to_dict()
    assert d["delta_numerator"] == 2 * expected and d["denominator"] == 2 and d["radius"] == radius
    assert "millis" not in d and "millis" in rep.to_dict(with_timing=True)


def test_witness_attains_the_defect():
    ball = build_ball(symmetric_group(4), 6)
    rep = delta_of_ball(ball)
    x, y, z, t = (ball.vertices[i] for i in rep.witness_indices)
    assert quadruple_defect(ball.distance, x, y, z, t) == rep.delta
    assert list(rep.witness) == [str(v) for v in (x, y, z, t)]


def test_budget_marks_report_non_exhaustive():
    ball = build_ball(free_abelian(2), 4)
    rep = delta_of_ball(ball, Budget(max_quadruples=10))
    assert not rep.exhaustive
    assert rep.delta <= delta_of_ball(ball).delta


def test_check_delta():
    ball = build_ball(symmetric_group(3), 3)
    assert check_delta(ball, 1) is None
    w = check_delta(ball, Fraction(1, 2))
    assert w is not None
    D = ball.distance_matrix()
    assert quadruple_defect(lambda i, j: D[i][j], *w) > Fraction(1, 2)


def test_small_inputs():
    D = np.array([[0, 1], [1, 0]])
    assert pruned_delta(D) == (0, None, 0, True)
    assert delta_of_matrix(D).witness is None


def test_s4_matches_kendall_tau_metric():
    # adjacent transpositions: word length is the inversion count
    from itertools import permutations
    P = list(permutations(range(4)))

    def kendall(p, q):
        pos = {v: i for i, v in enumerate(q)}
        r = [pos[v] for v in p]
        return sum(r[i] > r[j] for i in range(4) for j in range(i + 1, 4))

    D = np.array([[kendall(p, q) for q in P] for p in P])
    assert delta_of_matrix(D).delta_numerator == brute_delta2(D) == 6
