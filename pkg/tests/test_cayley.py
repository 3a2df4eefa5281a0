import numpy as np
import pytest
from hypothesis import given, strategies as st

from hyperrips.cayley import (Ball, ball_to_dot, ball_to_table, build_ball, diameter, geodesic, orbit,
                              set_distance, word_distance, word_length)
from hyperrips.errors import OutOfRange, ResourceExhausted
from hyperrips.groups import free_abelian, free_group, free_product, infinite_dihedral, load_group, symmetric_group
from oracles import bfs_distances, dinf_matrix, free_reduce, psl_matrix

F2 = free_group(2)
DINF = infinite_dihedral()
Z2Z3 = free_product(2, 3)
Z2 = free_abelian(2)
S3 = symmetric_group(3)


@pytest.mark.parametrize("r", range(0, 6))
def test_ball_sizes_match_growth_formulas(r):
    assert len(build_ball(F2, r).vertices) == 2 * 3 ** r - 1
    assert len(build_ball(DINF, r).vertices) == 2 * r + 1
    assert len(build_ball(Z2, r).vertices) == 2 * r * r + 2 * r + 1
    assert len(build_ball(S3, r).vertices) == [1, 3, 5, 6, 6, 6][r]


def _matrix_key(m):
    return tuple(int(x) for x in m.flatten())


@pytest.mark.parametrize("o,to_key,gens", [
    (F2, lambda w: free_reduce(w), {"a": "a", "A": "A", "b": "b", "B": "B"}),
    (DINF, lambda w: _matrix_key(dinf_matrix(w)), None),
    (Z2Z3, lambda w: _matrix_key(psl_matrix(w)), None),
])
def test_distance_matrix_matches_independent_bfs(o, to_key, gens):
    ball = build_ball(o, 3)
    labels = list(o.generators().items)
    # BFS in the group presented by the reference solver, states carried as words
    for v in ball.vertices[:12]:
        start = tuple(v.word)
        seen = {to_key(start): 0}
        frontier = [start]
        for k in range(1, 7):
            nxt = []
            for w in frontier:
                for s in labels:
                    w2 = w + (s,)
                    key = to_key(w2)
                    if key not in seen:
                        seen[key] = k
                        nxt.append(w2)
            frontier = nxt
        for j, u in enumerate(ball.vertices):
            assert ball.distance_matrix()[ball.index[v], j] == seen[to_key(u.word)]


def test_distance_matrix_is_a_metric_and_read_only():
    D = build_ball(Z2Z3, 4).distance_matrix()
    assert (D == D.T).all() and (np.diag(D) == 0).all()
    n = len(D)
    for k in range(n):
        assert (D <= D[:, [k]] + D[[k], :]).all()
    with pytest.raises(ValueError):
        D[0, 1] = 5


@given(st.lists(st.sampled_from(["a", "A", "b", "B"]), max_size=10),
       st.lists(st.sampled_from(["a", "A", "b", "B"]), max_size=10))
def test_left_invariance_and_free_distance(u, v):
    x, y = F2.element(u), F2.element(v)
    g = F2.element("abA")
    d = word_distance(F2, x, y, 100)
    assert d == len(free_reduce(tuple(c.swapcase() for c in reversed(x.word)) + y.word))
    assert word_distance(F2, F2.multiply(g, x), F2.multiply(g, y), 100) == d


@given(st.lists(st.sampled_from(["a", "b", "b2"]), max_size=10))
def test_geodesic_is_lex_least_and_tight(w):
    y = Z2Z3.element(w)
    p = geodesic(Z2Z3, Z2Z3.identity(), y, 50)
    assert len(p) == word_length(Z2Z3, y, 50)
    assert p.at(0) == Z2Z3.identity() and p.at(len(p)) == y
    for k in range(len(p)):
        assert word_distance(Z2Z3, p.at(k), p.at(k + 1), 50) == 1
        assert word_distance(Z2Z3, p.at(k), y, 50) == len(p) - k


def test_geodesic_leaving_the_ball_is_out_of_range():
    o = free_abelian(1)
    ball = Ball(o, 3)
    with pytest.raises(OutOfRange):
        ball.require(o.element("aaaa"))
    with pytest.raises(OutOfRange):
        ball.distance(o.identity(), o.element("aaaa"))


def test_set_distance_is_max_max():
    ball = Ball(DINF, 6)
    K = [DINF.element("a"), DINF.element("ab")]
    L = [DINF.element("b")]
    assert set_distance(ball, K, L) == max(ball.distance(k, l) for k in K for l in L) == 3
    assert diameter(ball, K) == set_distance(ball, K, K) == 1
    assert diameter(ball, [DINF.identity()]) == 0
    with pytest.raises(ValueError):
        set_distance(ball, [], L)


def test_size_guard():
    with pytest.raises(ResourceExhausted):
        build_ball(F2, 8, size_guard=100)


def test_explicit_generating_set_uses_bfs_lengths():
    o = load_group({"kind": "free_abelian", "parameters": {"rank": 1}, "generating_set": ["a", "A", "aaa", "AAA"]})
    ball = build_ball(o, 2)
    assert len(ball.vertices) == 11  # 0, ±1, ±2, ±3, ±4, ±6; ±5 needs three steps
    assert ball.distance(o.identity(), o.element("aaaaaa")) == 2
    assert word_length(o, o.element("aaaaa"), 10) == 3  # aaa.a.a
    assert not ball.contains(o.element("aaaaa"))


def test_orbit_and_exports():
    H = [DINF.identity(), DINF.element("a")]
    assert [str(v) for v in orbit(DINF, H, DINF.element("b"))] == ["b", "ab"]
    ball = build_ball(DINF, 2)
    dot = ball_to_dot(ball)
    assert dot.count(" -- ") == 4 and dot.count("label=") == 5
    t = ball_to_table(ball)
    assert t["vertices"] == ["e", "a", "b", "ab", "ba"]
    assert t["dist_to_center"] == [0, 1, 1, 2, 2]
