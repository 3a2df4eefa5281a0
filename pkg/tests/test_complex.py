from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, strategies as st
from sympy import Matrix, ZZ
from sympy.matrices.normalforms import invariant_factors

from hyperrips.cayley import build_ball
from hyperrips.complex import (ExplicitComplex, barycentric_subdivision, cone, enumerate_simplices,
                               flag_from_matrix, flag_to_dot, full_simplex, greedy_collapse, parse_faces,
                               reduced_homology, rips_complex, simplex_boundary, smith_invariants)
from hyperrips.errors import ResourceExhausted
from hyperrips.groups import infinite_dihedral, symmetric_group

# the minimal 6-vertex triangulation of the projective plane
RP2 = [(0, 1, 3), (0, 1, 4), (0, 2, 3), (0, 2, 5), (0, 4, 5), (1, 2, 4), (1, 2, 5), (1, 3, 5), (2, 3, 4), (3, 4, 5)]


def sympy_invariants(rows, ncols):
    M = Matrix([[r.get(c, 0) for c in range(ncols)] for r in rows])
    return sorted(abs(int(x)) for x in invariant_factors(M, domain=ZZ) if x != 0)


@given(st.integers(1, 6), st.integers(1, 6), st.data())
def test_smith_invariants_match_sympy(m, n, data):
    entries = data.draw(st.lists(st.integers(-6, 6), min_size=m * n, max_size=m * n))
    rows = [{c: entries[r * n + c] for c in range(n) if entries[r * n + c]} for r in range(m)]
    if not any(rows):
        assert smith_invariants(rows) == []
        return
    assert sorted(smith_invariants(rows)) == sympy_invariants(rows, n)


@pytest.mark.parametrize("n", range(1, 10))
def test_full_simplices_are_acyclic_and_collapsible(n):
    ec = full_simplex(n)
    assert reduced_homology(ec).is_trivial()
    assert greedy_collapse(ec)[1]
    assert ec.f_vector() == [len(list(combinations(range(n), k))) for k in range(1, n + 1)]


@pytest.mark.parametrize("n,dim", [(3, 1), (4, 2), (5, 3)])
def test_sphere_boundaries(n, dim):
    h = reduced_homology(simplex_boundary(n))
    assert h.betti(dim) == 1
    assert all(h.betti(k) == 0 and not h.torsion(k) for k in range(dim))
    assert not greedy_collapse(simplex_boundary(n))[1]


def test_projective_plane_torsion_survives_subdivision():
    ec = ExplicitComplex(range(6), RP2)
    h = reduced_homology(ec)
    assert h.torsion(1) == (2,) and h.betti(1) == 0 and h.betti(2) == 0
    h2 = reduced_homology(barycentric_subdivision(ec))
    assert h2.groups == h.groups


def test_empty_complex_and_point():
    assert reduced_homology(ExplicitComplex([], [])).groups == {-1: (1, ())}
    assert reduced_homology(full_simplex(1)).is_trivial()
    assert not ExplicitComplex([], []).is_connected()


def test_subdivision_of_triangle():
    sd = barycentric_subdivision(full_simplex(3))
    assert sd.f_vector() == [7, 12, 6]
    assert greedy_collapse(sd)[1]


@st.composite
def small_complexes(draw):
    n = draw(st.integers(1, 6))
    facets = draw(st.lists(st.sets(st.integers(0, n - 1), min_size=1, max_size=4), min_size=1, max_size=6))
    return ExplicitComplex(range(n), [tuple(f) for f in facets])


@given(small_complexes())
def test_euler_characteristic_matches_betti_numbers(ec):
    h = reduced_homology(ec)
    chi = sum((-1) ** k * h.betti(k) for k in range(ec.dim + 1))
    assert chi == ec.euler_characteristic() - 1


@given(small_complexes())
def test_subdivision_preserves_homology(ec):
    sd = barycentric_subdivision(ec)
    assert reduced_homology(sd).groups == reduced_homology(ec).groups
    assert sd.euler_characteristic() == ec.euler_characteristic()


@given(small_complexes())
def test_collapsible_implies_acyclic_and_cones_collapse(ec):
    core, flag = greedy_collapse(ec)
    if flag:
        assert reduced_homology(ec).is_trivial()
    nonzero = lambda h: {k: v for k, v in h.groups.items() if v != (0, ())}
    assert nonzero(reduced_homology(core)) == nonzero(reduced_homology(ec))
    assert greedy_collapse(cone(ec))[1]


@given(st.integers(4, 12), st.data())
def test_flag_enumeration_matches_brute_force_cliques(n, data):
    bits = data.draw(st.lists(st.booleans(), min_size=n * n, max_size=n * n))
    A = np.array(bits).reshape(n, n)
    A = A | A.T
    np.fill_diagonal(A, False)
    D = np.where(A, 1, 2)
    np.fill_diagonal(D, 0)
    fc = flag_from_matrix(D, 1)
    got = enumerate_simplices(fc, 3)
    brute = [s for k in range(1, 5) for s in combinations(range(n), k)
             if all(A[i, j] for i, j in combinations(s, 2))]
    assert got == sorted(brute, key=lambda s: (len(s), s))


def test_rips_complex_of_small_balls():
    ball = build_ball(infinite_dihedral(), 4)
    fc = rips_complex(ball, 2)
    ec = ExplicitComplex(fc.vertices, enumerate_simplices(fc, 5), fc.labels)
    # the line Z with d = 2: triangles {i, i+1, i+2} on 9 vertices
    assert ec.f_vector() == [9, 15, 7]
    assert reduced_homology(ec).is_trivial()
    assert fc.boundary_effects is False
    assert flag_to_dot(fc).count(" -- ") == 15
    with pytest.raises(ResourceExhausted):
        enumerate_simplices(fc, 5, guard=10)


def test_rips_complex_of_s3_is_a_full_simplex_for_large_d():
    ball = build_ball(symmetric_group(3), 3)
    fc = rips_complex(ball, 3)
    ec = ExplicitComplex(fc.vertices, enumerate_simplices(fc, 6), fc.labels)
    assert ec.f_vector() == full_simplex(6).f_vector()


def test_face_list_round_trip():
    ec = barycentric_subdivision(simplex_boundary(3))
    text = ec.to_faces()
    back = parse_faces(text)
    assert back.relabel_equal(ec)
    assert back.to_faces().splitlines()[0] == text.splitlines()[0]
    assert reduced_homology(back).groups == reduced_homology(ec).groups
    assert ec.maximal_simplices() and all(len(s) == 2 for s in ec.maximal_simplices())
