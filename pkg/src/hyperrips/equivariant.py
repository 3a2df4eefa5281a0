"""Finite subgroups acting on the Rips complex.

Vertices are group elements; ``g`` acts by left multiplication.  A simplex
``sigma`` belongs to the subcomplex F exactly when its H-orbit closure
``H * sigma`` still has diameter at most ``d``; F is therefore the flag
complex on the vertices ``v`` with ``d(Hv) <= d`` whose edges ``{u, v}``
satisfy ``d(H{u, v}) <= d``.

The fixed set of H is modelled by H-invariant simplices.  Such a simplex is
a union of H-orbits, so the invariant simplices are the faces of the
*orbit complex* (vertices: small orbits; simplices: orbit sets whose union
has diameter <= d).  Its barycentric subdivision is the order complex of the
invariant-simplex poset.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .cayley import Ball, build_ball, diameter, orbit, set_distance
from .certificates import Check
from .complex import (ExplicitComplex, FlagComplex, barycentric_subdivision,
                      enumerate_simplices, flag_from_matrix)
from .errors import CertificateFailure, OutOfRange, ResourceExhausted, ValidationError
from .groups import GroupElement, GroupOracle


@dataclass(frozen=True)
class SubgroupRecord:
    elements: tuple[GroupElement, ...]
    order: int
    max_word_length: int

    @classmethod
    def from_elements(cls, o: GroupOracle, elements: Iterable[GroupElement]) -> "SubgroupRecord":
        elems = tuple(o.sorted(set(elements)))
        return cls(elems, len(elems), max(len(g.word) for g in elems))

    def __iter__(self):
        return iter(self.elements)

    def __len__(self) -> int:
        return self.order

    def words(self) -> list[str]:
        return [str(g) for g in self.elements]

    def to_dict(self) -> dict:
        return {"order": self.order, "elements": self.words(), "max_word_length": self.max_word_length}


def trivial_subgroup(o: GroupOracle) -> SubgroupRecord:
    return SubgroupRecord.from_elements(o, [o.identity()])


def subgroup_closure(o: GroupOracle, generators: Iterable[GroupElement], order_guard: int = 10_000,
                     within: Ball | None = None) -> SubgroupRecord:
    """Subgroup generated by ``generators``.

    Raises ResourceExhausted past ``order_guard`` elements and OutOfRange as
    soon as an element leaves ``within``.
    """
    gens = [g for g in generators if g.word]
    gens = gens + [o.invert(g) for g in gens]
    elems = {o.identity()}
    frontier = [o.identity()]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = o.multiply(x, g)
                if y not in elems:
                    if within is not None and not within.contains(y):
                        raise OutOfRange(f"closure leaves the ball of radius {within.radius} at {y}")
                    elems.add(y)
                    nxt.append(y)
                    if len(elems) > order_guard:
                        raise ResourceExhausted(f"subgroup exceeds {order_guard} elements", len(elems))
        frontier = nxt
    return SubgroupRecord.from_elements(o, elems)


def verify_subgroup(o: GroupOracle, H: SubgroupRecord) -> bool:
    s = set(H.elements)
    if o.identity() not in s or len(s) != H.order:
        return False
    return all(o.invert(a) in s for a in s) and all(o.multiply(a, b) in s for a in s for b in s)


# ---------------------------------------------------------------------------
# orbits and F


def act(o: GroupOracle, g: GroupElement, sigma: Iterable[GroupElement], ball: Ball | None = None) -> list[GroupElement]:
    out = [o.multiply(g, v) for v in sigma]
    if ball is not None:
        for v in out:
            ball.require(v)
    return o.sorted(out)


@dataclass(frozen=True)
class OrbitSummary:
    subgroup: SubgroupRecord
    base: GroupElement
    orbit: tuple[GroupElement, ...]
    diameter: int


def orbit_summary(H: SubgroupRecord, x: GroupElement, ball: Ball) -> OrbitSummary:
    o = ball.oracle
    hx = orbit(o, H.elements, x)
    for v in hx:
        ball.require(v)
    diam = diameter(ball, hx)
    from_base = set_distance(ball, [x], hx)
    if diam != from_base:  # left-invariance makes these equal
        raise CertificateFailure("orbit_diameter_identity", f"d(Hx)={diam} but d({{x}},Hx)={from_base}")
    return OrbitSummary(H, x, tuple(hx), diam)


def orbit_diameter(H: SubgroupRecord, x: GroupElement, ball: Ball) -> int:
    o = ball.oracle
    return max(ball.distance(x, o.multiply(h, x)) for h in H.elements)


def pair_in_F(H: SubgroupRecord, u: GroupElement, v: GroupElement, d: int, ball: Ball) -> bool:
    """d(H{u, v}) <= d, the edge condition of F (u == v gives the vertex condition)."""
    o = ball.oracle
    if orbit_diameter(H, u, ball) > d:
        return False
    if u == v:
        return True
    if orbit_diameter(H, v, ball) > d:
        return False
    # d(hu, h'v) = d(u, h^-1 h' v): it suffices to range over one orbit
    return all(ball.distance(u, o.multiply(h, v)) <= d for h in H.elements)


def f_membership(H: SubgroupRecord, sigma: Sequence[GroupElement], d: int, ball: Ball) -> bool:
    """True iff the H-orbit closure of sigma has diameter <= d."""
    o = ball.oracle
    closure = {o.multiply(h, v) for h in H.elements for v in sigma}
    return diameter(ball, closure) <= d


# ---------------------------------------------------------------------------
# fixed-point models


@dataclass
class InvariantSimplexPoset:
    subgroup: SubgroupRecord
    d: int
    orbits: list[tuple[GroupElement, ...]]
    elements: list[tuple[int, ...]]  # orbit-index sets, increasing
    truncated_orbits: int = 0

    def vertex_set(self, k: int) -> frozenset[GroupElement]:
        return frozenset(v for i in self.elements[k] for v in self.orbits[i])

    def __len__(self) -> int:
        return len(self.elements)

    def orbit_label(self, i: int) -> str:
        return "{" + ",".join(str(v) for v in self.orbits[i]) + "}"


def invariant_simplex_poset(H: SubgroupRecord, ball: Ball, d: int, guard: int = 1_000_000) -> InvariantSimplexPoset:
    o = ball.oracle
    seen: set[GroupElement] = set()
    orbits: list[tuple[GroupElement, ...]] = []
    dropped = 0
    for v in ball.vertices:
        if v in seen:
            continue
        hv = tuple(orbit(o, H.elements, v))
        seen.update(hv)
        if not all(ball.contains(w) for w in hv):
            dropped += 1
            continue
        if diameter(ball, hv) <= d:
            orbits.append(hv)
    n = len(orbits)
    M = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        for j in range(i + 1, n):
            M[i, j] = M[j, i] = set_distance(ball, orbits[i], orbits[j])
    fc = flag_from_matrix(M, d)
    elements = enumerate_simplices(fc, max(n - 1, 0), guard) if n else []
    return InvariantSimplexPoset(H, d, orbits, elements, dropped)


def fixed_point_complex(poset: InvariantSimplexPoset, model: str = "orbit", guard: int = 2_000_000) -> ExplicitComplex:
    """Simplicial model of the fixed set P_d^H inside the ball.

    ``model="orbit"``: the orbit complex, whose face poset is ``poset``.
    ``model="order"``: the order complex of ``poset`` (chains of invariant
    simplices); equal to the barycentric subdivision of the orbit complex and
    only feasible for small posets.
    """
    labels = [poset.orbit_label(i) for i in range(len(poset.orbits))]
    if model == "orbit":
        return ExplicitComplex(list(poset.orbits), poset.elements, labels)
    if model != "order":
        raise ValueError(f"unknown model {model!r}")
    elems = sorted(poset.elements, key=lambda s: (len(s), s))
    sets = [frozenset(s) for s in elems]
    by_size: dict[int, list[int]] = {}
    for k, s in enumerate(sets):
        by_size.setdefault(len(s), []).append(k)
    # chains built upward by strict inclusion
    chains: list[tuple[int, ...]] = []
    up = {k: [m for m, t in enumerate(sets) if len(t) > len(sets[k]) and sets[k] < t] for k in range(len(sets))}
    stack = [(k,) for k in range(len(sets))]
    while stack:
        c = stack.pop()
        chains.append(c)
        if len(chains) > guard:
            raise ResourceExhausted(f"order complex exceeds {guard} simplices", len(chains))
        stack.extend(c + (m,) for m in up[c[-1]])
    verts = [tuple(poset.orbits[i] for i in s) for s in elems]
    vlabels = ["[" + ",".join(labels[i] for i in s) + "]" for s in elems]
    return ExplicitComplex(verts, chains, vlabels)


# ---------------------------------------------------------------------------
# the small-orbit lemma


@dataclass
class LemmaCertificate:
    R: int
    y_prime: GroupElement
    x: GroupElement
    checks: list[Check] = field(default_factory=list)
    part_b: str = "not requested"

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def to_dict(self) -> dict:
        return {"R": self.R, "y_prime": str(self.y_prime), "x": str(self.x), "part_b": self.part_b,
                "checks": {c.name: c.to_dict() for c in self.checks}}


def small_orbit_vertex(H: SubgroupRecord, y0: GroupElement, delta, ball: Ball,
                       x0: GroupElement | None = None, strict: bool = True) -> tuple[GroupElement, LemmaCertificate]:
    """Vertex x with a universally small orbit, built on a geodesic from the far end of Hy0."""
    o = ball.oracle
    delta = Fraction(delta)
    hy0 = orbit(o, H.elements, y0)
    R = max(ball.distance(y0, v) for v in hy0)
    y_prime = next(v for v in hy0 if ball.distance(v, y0) == R)
    path = ball.geodesic(y_prime, y0)
    x = path.at(R - R // 2)  # d(x, y0) = floor(R/2)
    hx = orbit(o, H.elements, x)
    cert = LemmaCertificate(R, y_prime, x)
    cert.checks.append(Check("a1", set_distance(ball, hx, hy0), "<=", R // 2 + 2 * delta + 1))
    cert.checks.append(Check("a2", diameter(ball, hx), "<=", 8 * delta + 4))
    if x0 is not None:
        d_x0y0 = ball.distance(x0, y0)
        if R >= 8 * delta + 2 and d_x0y0 == set_distance(ball, hy0, [x0]):
            cert.part_b = "applied"
            cert.checks.append(Check("b", set_distance(ball, hx, [x0]), "<=", d_x0y0))
        else:
            cert.part_b = "hypotheses not met"
    if strict:
        for c in cert.checks:
            if not c.ok:
                raise CertificateFailure(
                    f"lemma_{c.name}", f"{c.lhs} {c.rel} {c.rhs} fails for y0={y0} with delta={delta} "
                    "(either the lemma is false here or delta is underestimated)", data=cert.to_dict())
    return x, cert


# ---------------------------------------------------------------------------
# finite subgroups and their conjugacy classes


def enumerate_finite_subgroups(o: GroupOracle, delta, order_guard: int = 1000, torsion_guard: int = 64,
                               radius: int | None = None, size_guard: int = 200_000) -> list[SubgroupRecord]:
    """Every finite subgroup contained in B(e, floor(8 delta + 4)).

    Seeds are the cyclic subgroups of torsion elements; joins are closed until
    no new subgroup stays inside the ball.
    """
    if radius is None:
        radius = math.floor(8 * Fraction(delta) + 4)
    ball = build_ball(o, radius, size_guard)
    found: dict[frozenset, SubgroupRecord] = {}
    triv = trivial_subgroup(o)
    found[frozenset(triv.elements)] = triv
    for g in ball.vertices[1:]:
        if o.order_of(g, torsion_guard) is None:
            continue
        try:
            H = subgroup_closure(o, [g], order_guard, within=ball)
        except (OutOfRange, ResourceExhausted):
            continue
        found.setdefault(frozenset(H.elements), H)
    frontier = list(found)
    while frontier:
        new = []
        keys = list(found)
        for a in frontier:
            for b in keys:
                if a <= b or b <= a:
                    continue
                gens = [g for g in a | b]
                try:
                    J = subgroup_closure(o, gens, order_guard, within=ball)
                except (OutOfRange, ResourceExhausted):
                    continue
                k = frozenset(J.elements)
                if k not in found:
                    found[k] = J
                    new.append(k)
        frontier = new
    return sorted(found.values(), key=lambda H: (H.order, [o.key(g) for g in H.elements]))


@dataclass
class ConjugacyClass:
    class_id: int
    representative: SubgroupRecord
    members: list[SubgroupRecord]
    escaped_conjugates: int = 0

    def to_dict(self) -> dict:
        return {"class_id": self.class_id, "order": self.representative.order,
                "representative": self.representative.words(),
                "members": [m.words() for m in self.members],
                "escaped_conjugates": self.escaped_conjugates}


def conjugacy_classes(subs: Sequence[SubgroupRecord], o: GroupOracle, conjugator_radius: int,
                      size_guard: int = 200_000) -> list[ConjugacyClass]:
    """Partition ``subs`` under conjugation by elements of B(e, conjugator_radius)."""
    conj_ball = build_ball(o, conjugator_radius, size_guard)
    keys = [frozenset(H.elements) for H in subs]
    index = {k: i for i, k in enumerate(keys)}
    parent = list(range(len(subs)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    escaped = [0] * len(subs)
    for i, H in enumerate(subs):
        for g in conj_ball.vertices:
            k = frozenset(o.conjugate(g, h) for h in H.elements)
            j = index.get(k)
            if j is None:
                escaped[i] += 1
            else:
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(len(subs)):
        groups.setdefault(find(i), []).append(i)

    def rep_key(H):
        return [o.key(g) for g in H.elements]

    classes = []
    for members in groups.values():
        ms = sorted((subs[i] for i in members), key=rep_key)
        classes.append((ms[0], ms, sum(escaped[i] for i in members)))
    classes.sort(key=lambda c: (c[0].order, rep_key(c[0])))
    return [ConjugacyClass(k, rep, ms, esc) for k, (rep, ms, esc) in enumerate(classes)]


# ---------------------------------------------------------------------------
# Rips-Theorem property checks


def stabilizer(o: GroupOracle, sigma: Sequence[GroupElement]) -> list[GroupElement]:
    """Setwise stabilizer of a finite vertex set, exact via the candidates u v^-1."""
    s = set(sigma)
    cands = {o.multiply(u, o.invert(v)) for u in s for v in s}
    return o.sorted(g for g in cands if {o.multiply(g, x) for x in s} == s)


def canonical_translate(o: GroupOracle, sigma: Sequence[GroupElement]) -> tuple[GroupElement, ...]:
    """Least translate v^-1 sigma (v in sigma) - one label per G-orbit of simplices."""
    best = None
    for v in sigma:
        vi = o.invert(v)
        t = tuple(o.sorted(o.multiply(vi, x) for x in sigma))
        k = [o.key(x) for x in t]
        if best is None or k < best[0]:
            best = (k, t)
    return best[1]


def simplices_at_identity(o: GroupOracle, d: int, max_dim: int, guard: int,
                          size_guard: int = 200_000) -> tuple[list[tuple[GroupElement, ...]], bool]:
    """Simplices of P_d containing e (all lie in B(e, d)); flag says whether the list is complete."""
    ball = build_ball(o, d, size_guard)
    fc = flag_from_matrix(ball.distance_matrix(), d, ball.labels(), ball.vertices)
    nb = [0] + fc.neighbors(0)
    sub = fc.proximity[np.ix_(nb, nb)]
    local = FlagComplex(nb, sub.copy(), d, [fc.labels[i] for i in nb])
    complete = True
    out = []
    level = [(0,)]
    out.append((0,))
    masks = local._masks
    for _ in range(max_dim):
        nxt = []
        for s in level:
            common = masks[s[0]]
            for v in s[1:]:
                common &= masks[v]
            common >>= s[-1] + 1
            j = s[-1] + 1
            while common:
                if common & 1:
                    nxt.append(s + (j,))
                common >>= 1
                j += 1
        if not nxt:
            break
        if len(out) + len(nxt) > guard:
            nxt = nxt[: guard - len(out)]
            complete = False
        out.extend(nxt)
        level = nxt
        if not complete:
            break
    if complete and level:
        # a further level might exist beyond max_dim
        complete = not _has_extension(level, masks)
    simplices = [tuple(ball.vertices[nb[i]] for i in s) for s in out]
    return simplices, complete


def _has_extension(level, masks) -> bool:
    for s in level:
        common = masks[s[0]]
        for v in s[1:]:
            common &= masks[v]
        if common >> (s[-1] + 1):
            return True
    return False


def act_nested(o: GroupOracle, g: GroupElement, p):
    """Left action on vertices of iterated barycentric subdivisions (nested tuples)."""
    if isinstance(p, GroupElement):
        return o.multiply(g, p)
    return tuple(sorted((act_nested(o, g, q) for q in p), key=lambda q: _nested_key(o, q)))


def _nested_key(o: GroupOracle, p):
    if isinstance(p, GroupElement):
        return (0, o.key(p))
    return (1, len(p), [_nested_key(o, q) for q in p])


def second_subdivision(o: GroupOracle, vertices: Sequence[GroupElement], d: int, ball: Ball) -> ExplicitComplex:
    verts = o.sorted(vertices)
    sets = []
    for k in range(1, len(verts) + 1):
        for s in combinations(verts, k):
            if all(ball.distance(u, v) <= d for u, v in combinations(s, 2)):
                sets.append(s)
    L = ExplicitComplex.from_vertex_sets(sets, order=verts)
    sd2 = barycentric_subdivision(barycentric_subdivision(L))
    # canonicalize nested vertex tuples so that act_nested lands on equal keys
    sd2.vertices = [_canon(o, p) for p in sd2.vertices]
    return sd2


def _canon(o, p):
    if isinstance(p, GroupElement):
        return p
    return tuple(sorted((_canon(o, q) for q in p), key=lambda q: _nested_key(o, q)))


@dataclass
class StarCheck:
    vertices: list[str]
    sd2_vertices: int
    pairs_checked: int
    open_star_overlaps: int
    closed_star_overlaps: int


def star_disjointness(o: GroupOracle, vertices: Sequence[GroupElement], d: int, ball: Ball) -> StarCheck:
    """For p in sd^2(L) and g with gp in sd^2(L), gp != p: no simplex contains both p and gp."""
    sd2 = second_subdivision(o, vertices, d, ball)
    index = {p: i for i, p in enumerate(sd2.vertices)}
    nbrs: dict[int, set[int]] = {i: {i} for i in range(len(sd2.vertices))}
    for s in sd2.simplices:
        if len(s) == 2:
            nbrs[s[0]].add(s[1])
            nbrs[s[1]].add(s[0])
    vs = set(vertices)
    cands = {o.multiply(u, o.invert(v)) for u in vs for v in vs} - {o.identity()}
    pairs = open_hits = closed_hits = 0
    for g in o.sorted(cands):
        for p, i in index.items():
            j = index.get(act_nested(o, g, p))
            if j is None or j == i:
                continue
            pairs += 1
            if j in nbrs[i]:
                open_hits += 1
            if nbrs[i] & nbrs[j]:
                closed_hits += 1
    return StarCheck([str(v) for v in o.sorted(vertices)], len(sd2.vertices), pairs, open_hits, closed_hits)


def rips_theorem_checks(o: GroupOracle, d: int, delta, max_dim: int = 3, guard: int = 20_000,
                        n_star: int = 12, torsion_guard: int = 64, force: bool = False) -> dict:
    delta = Fraction(delta)
    if d < 4 * delta + 2 and not force:
        raise ValidationError("d", f"Rips-Theorem checks need d >= 4*delta+2 = {4 * delta + 2}")
    ball = Ball(o, 3 * d)
    simplices, complete = simplices_at_identity(o, d, max_dim, guard)
    stab_sizes = {}
    reps: dict[tuple, int] = {}
    for s in simplices:
        st = stabilizer(o, s)
        stab_sizes[s] = len(st)
        rep = canonical_translate(o, s)
        reps.setdefault(rep, len(st))
    # orbit-counting: simplices through e in the orbit of sigma number |sigma| / |Stab sigma|
    counted = sum(len(r) // reps[r] for r in reps)
    torsion = [str(g) for g in build_ball(o, d).vertices[1:] if o.order_of(g, torsion_guard) is not None]
    # star disjointness on small subcomplexes: sigma united with one generator translate
    stars: list[StarCheck] = []
    seen_sets = set()
    gens = [o.identity()] + [o.generators().elements[s] for s in o.generators().items]
    for s in simplices:
        if len(stars) >= n_star:
            break
        for g in gens:
            V = frozenset(s) | frozenset(o.multiply(g, v) for v in s)
            if len(V) > 4 or V in seen_sets:
                continue
            seen_sets.add(V)
            stars.append(star_disjointness(o, list(V), d, ball))
            if len(stars) >= n_star:
                break
    max_stab = max(stab_sizes.values())
    report = {
        "d": d,
        "delta": str(delta),
        "hypothesis_d_ge_4delta_plus_2": d >= 4 * delta + 2,
        "i_stabilizers": {
            "simplices_examined": len(simplices),
            "enumeration_complete": complete,
            "max_stabilizer_order": max_stab,
            "histogram": {str(k): v for k, v in sorted(_hist(stab_sizes.values()).items())},
            "all_finite": True,
        },
        "ii_star_disjointness": {
            "subcomplexes": len(stars),
            "pairs_checked": sum(c.pairs_checked for c in stars),
            "open_star_overlaps": sum(c.open_star_overlaps for c in stars),
            "closed_star_overlaps": sum(c.closed_star_overlaps for c in stars),
            "details": [c.__dict__ for c in stars],
            "pass": all(c.open_star_overlaps == 0 for c in stars),
        },
        "iii_orbit_representatives": {
            "count": len(reps),
            "finite": True,
            "complete": complete,
            "translates_through_e_recounted": counted,
            "translates_through_e": len(simplices),
        },
        "iv_torsion_free": {
            "torsion_in_ball": torsion[:20],
            "torsion_found": bool(torsion),
            "all_stabilizers_trivial": max_stab == 1,
            "pass": bool(torsion) or max_stab == 1,
        },
    }
    return report


def _hist(values) -> dict[int, int]:
    h: dict[int, int] = {}
    for v in values:
        h[v] = h.get(v, 0) + 1
    return h
