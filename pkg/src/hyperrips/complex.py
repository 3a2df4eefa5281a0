"""Flag complexes, explicit complexes, subdivision, integral homology, collapses.

A Rips complex is kept implicit as the flag closure of its proximity graph;
only small complexes are ever materialized as simplex lists.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from itertools import combinations
from math import gcd
from typing import Hashable, Iterable, Sequence

import numpy as np

from .errors import ResourceExhausted


# ---------------------------------------------------------------------------
# flag complexes


@dataclass
class FlagComplex:
    vertices: list
    proximity: np.ndarray  # boolean, symmetric, zero diagonal
    d_param: int
    labels: list[str]
    dim_cap: int | None = None

    def __post_init__(self):
        self._masks = [0] * len(self.vertices)
        for i, row in enumerate(self.proximity):
            m = 0
            for j in np.flatnonzero(row):
                m |= 1 << int(j)
            self._masks[i] = m

    def __len__(self) -> int:
        return len(self.vertices)

    def neighbors(self, i: int) -> list[int]:
        return [int(j) for j in np.flatnonzero(self.proximity[i])]

    def is_simplex(self, idx: Iterable[int]) -> bool:
        idx = list(idx)
        return all(self.proximity[i, j] for i, j in combinations(idx, 2)) and len(set(idx)) == len(idx)

    def edges(self) -> list[tuple[int, int]]:
        iu, ju = np.nonzero(np.triu(self.proximity, k=1))
        return sorted(zip(iu.tolist(), ju.tolist()))


def flag_from_matrix(D: np.ndarray, d: int, labels: Sequence[str] | None = None, vertices: list | None = None) -> FlagComplex:
    if d < 1:
        raise ValueError("Rips parameter must be >= 1")
    D = np.asarray(D)
    prox = (D >= 1) & (D <= d)
    np.fill_diagonal(prox, False)
    n = len(D)
    labels = list(labels) if labels is not None else [str(i) for i in range(n)]
    return FlagComplex(list(vertices) if vertices is not None else list(range(n)), prox, d, labels)


def rips_complex(ball, d: int) -> FlagComplex:
    """Rips complex P_d restricted to the vertices of ``ball``."""
    fc = flag_from_matrix(ball.distance_matrix(), d, ball.labels(), ball.vertices)
    fc.boundary_effects = ball.radius < d
    return fc


def enumerate_simplices(fc: FlagComplex, max_dim: int, guard: int = 1_000_000) -> list[tuple[int, ...]]:
    """All cliques with at most ``max_dim + 1`` vertices, by dimension then lexicographically."""
    if max_dim < 0:
        raise ValueError("max_dim must be >= 0")
    n = len(fc)
    level = [(i,) for i in range(n)]
    out = list(level)
    if len(out) > guard:
        raise ResourceExhausted(f"more than {guard} simplices", len(out))
    masks = fc._masks
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
        out.extend(nxt)
        if len(out) > guard:
            raise ResourceExhausted(f"more than {guard} simplices", len(out))
        level = nxt
    return out


def flag_to_dot(fc: FlagComplex, name: str = "rips") -> str:
    lines = [f"graph {name} {{"]
    for i, lab in enumerate(fc.labels):
        lines.append(f'  {i} [label="{lab}"];')
    for i, j in fc.edges():
        lines.append(f"  {i} -- {j};")
    lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# explicit complexes


class ExplicitComplex:
    """Finite abstract simplicial complex, closed under faces.

    Simplices are stored as increasing tuples of vertex indices; ``vertices``
    holds the underlying (hashable) vertex objects in a fixed order.
    """

    def __init__(self, vertices: Sequence[Hashable], simplices: Iterable[tuple[int, ...]], labels: Sequence[str] | None = None):
        self.vertices = list(vertices)
        self.labels = list(labels) if labels is not None else [_label(v) for v in self.vertices]
        closed: set[tuple[int, ...]] = set()
        for s in simplices:
            s = tuple(sorted(set(s)))
            if not s or s in closed:
                continue
            for k in range(1, len(s) + 1):
                closed.update(combinations(s, k))
        self.simplices = frozenset(closed)
        self._sorted: list[tuple[int, ...]] | None = None

    @classmethod
    def from_vertex_sets(cls, sets: Iterable[Iterable[Hashable]], order: Sequence[Hashable] | None = None,
                         labels: dict | None = None) -> "ExplicitComplex":
        sets = [list(s) for s in sets]
        if order is None:
            order, seen = [], set()
            for s in sets:
                for v in s:
                    if v not in seen:
                        seen.add(v)
                        order.append(v)
        index = {v: i for i, v in enumerate(order)}
        labs = [labels[v] for v in order] if labels is not None else None
        return cls(order, (tuple(index[v] for v in s) for s in sets), labs)

    def sorted_simplices(self) -> list[tuple[int, ...]]:
        if self._sorted is None:
            self._sorted = sorted(self.simplices, key=lambda s: (len(s), s))
        return self._sorted

    def __len__(self) -> int:
        return len(self.simplices)

    def __contains__(self, s) -> bool:
        return tuple(sorted(s)) in self.simplices

    @property
    def dim(self) -> int:
        return max((len(s) - 1 for s in self.simplices), default=-1)

    def f_vector(self) -> list[int]:
        f = [0] * (self.dim + 1)
        for s in self.simplices:
            f[len(s) - 1] += 1
        return f

    def euler_characteristic(self) -> int:
        return sum((-1) ** k * n for k, n in enumerate(self.f_vector()))

    def used_vertices(self) -> list[int]:
        return sorted(s[0] for s in self.simplices if len(s) == 1)

    def is_connected(self) -> bool:
        verts = self.used_vertices()
        if not verts:
            return False
        parent = {v: v for v in verts}

        def find(v):
            while parent[v] != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            return v

        for s in self.simplices:
            if len(s) == 2:
                parent[find(s[0])] = find(s[1])
        return len({find(v) for v in verts}) == 1

    def face_lines(self) -> list[str]:
        return [" ".join(self.labels[i] for i in s) for s in self.sorted_simplices()]

    def to_faces(self) -> str:
        return "".join(line + "\n" for line in self.face_lines())

    def maximal_simplices(self) -> list[tuple[int, ...]]:
        maximal = set(self.simplices)
        for s in self.simplices:
            if len(s) > 1:
                for k in range(len(s)):
                    maximal.discard(s[:k] + s[k + 1:])
        return sorted(maximal, key=lambda s: (len(s), s))

    def relabel_equal(self, other: "ExplicitComplex") -> bool:
        """Equality of the complexes as sets of labelled simplices."""
        a = {frozenset(self.labels[i] for i in s) for s in self.simplices}
        b = {frozenset(other.labels[i] for i in s) for s in other.simplices}
        return a == b


def _label(v) -> str:
    if isinstance(v, tuple):
        return "[" + ",".join(_label(x) for x in v) + "]"
    return str(v)


def parse_faces(text: str) -> ExplicitComplex:
    sets = [line.split() for line in text.splitlines() if line.strip() and not line.lstrip().startswith("#")]
    return ExplicitComplex.from_vertex_sets(sets, labels=None)


def full_simplex(n_vertices: int) -> ExplicitComplex:
    return ExplicitComplex(range(n_vertices), [tuple(range(n_vertices))])


def simplex_boundary(n_vertices: int) -> ExplicitComplex:
    return ExplicitComplex(range(n_vertices), combinations(range(n_vertices), n_vertices - 1))


def cone(ec: ExplicitComplex, apex: Hashable = "apex") -> ExplicitComplex:
    a = len(ec.vertices)
    simplices = list(ec.simplices) + [s + (a,) for s in ec.simplices] + [(a,)]
    return ExplicitComplex(ec.vertices + [apex], simplices, ec.labels + [str(apex)])


def barycentric_subdivision(ec: ExplicitComplex) -> ExplicitComplex:
    """Order complex of the face poset: vertices are simplices, simplices are chains."""
    order = ec.sorted_simplices()
    index = {s: i for i, s in enumerate(order)}
    chains_ending: dict[tuple[int, ...], list[tuple[int, ...]]] = {}
    for s in order:  # faces come before cofaces in this order
        here = [(index[s],)]
        if len(s) > 1:
            seen = set()
            for k in range(1, len(s)):
                for f in combinations(s, k):
                    for c in chains_ending[f]:
                        if c not in seen:
                            seen.add(c)
                            here.append(c + (index[s],))
        chains_ending[s] = here
    all_chains = [c for s in order for c in chains_ending[s]]
    verts = [tuple(ec.vertices[i] for i in s) for s in order]
    labels = ["[" + ",".join(ec.labels[i] for i in s) + "]" for s in order]
    return ExplicitComplex(verts, all_chains, labels)


# ---------------------------------------------------------------------------
# homology


@dataclass
class HomologyProfile:
    groups: dict[int, tuple[int, tuple[int, ...]]] = field(default_factory=dict)
    reduced: bool = True

    def betti(self, k: int) -> int:
        return self.groups.get(k, (0, ()))[0]

    def torsion(self, k: int) -> tuple[int, ...]:
        return self.groups.get(k, (0, ()))[1]

    def is_trivial(self) -> bool:
        return all(b == 0 and not t for b, t in self.groups.values())

    def to_dict(self) -> dict:
        return {str(k): {"betti": b, "torsion": list(t)} for k, (b, t) in sorted(self.groups.items())}


def smith_invariants(rows: list[dict[int, int]]) -> list[int]:
    """Nonzero invariant factors of a sparse integer matrix (rows as {col: value})."""
    rows = [dict(r) for r in rows if r]
    cols: dict[int, set[int]] = {}
    for i, r in enumerate(rows):
        for c in r:
            cols.setdefault(c, set()).add(i)
    alive = set(range(len(rows)))
    units = 0
    progress = True
    while progress:
        progress = False
        for i in sorted(alive):
            r = rows[i]
            c = next((c for c, v in sorted(r.items()) if v in (1, -1)), None)
            if c is None:
                continue
            p = r[c]
            for k in sorted(cols[c] - {i}):
                rk = rows[k]
                f = rk[c] * p  # p = +-1, so p^-1 = p
                for cc, v in r.items():
                    nv = rk.get(cc, 0) - f * v
                    if nv:
                        if cc not in rk:
                            cols.setdefault(cc, set()).add(k)
                        rk[cc] = nv
                    elif cc in rk:
                        del rk[cc]
                        cols[cc].discard(k)
                if not rk:
                    alive.discard(k)
            for cc in r:
                cols[cc].discard(i)
            alive.discard(i)
            units += 1
            progress = True
    rest = [rows[i] for i in sorted(alive) if rows[i]]
    if not rest:
        return [1] * units
    colset = sorted({c for r in rest for c in r})
    cindex = {c: j for j, c in enumerate(colset)}
    dense = [[0] * len(colset) for _ in rest]
    for i, r in enumerate(rest):
        for c, v in r.items():
            dense[i][cindex[c]] = v
    return [1] * units + _dense_smith(dense)


def _dense_smith(a: list[list[int]]) -> list[int]:
    m = len(a)
    n = len(a[0]) if m else 0
    diag = []
    t = 0
    while t < min(m, n):
        # pivot: smallest nonzero absolute value in the remaining block
        best = None
        for i in range(t, m):
            for j in range(t, n):
                if a[i][j] and (best is None or abs(a[i][j]) < abs(a[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        i, j = best
        a[t], a[i] = a[i], a[t]
        for row in a:
            row[t], row[j] = row[j], row[t]
        while True:
            p = a[t][t]
            done = True
            for i in range(t + 1, m):
                if a[i][t]:
                    q = a[i][t] // p
                    a[i] = [x - q * y for x, y in zip(a[i], a[t])]
                    if a[i][t]:
                        done = False
            for j in range(t + 1, n):
                if a[t][j]:
                    q = a[t][j] // p
                    for row in a:
                        row[j] -= q * row[t]
                    if a[t][j]:
                        done = False
            if done:
                break
            # move the smallest remainder into the pivot slot and repeat
            best = (t, t)
            for i in range(t, m):
                if a[i][t] and abs(a[i][t]) < abs(a[best[0]][best[1]]):
                    best = (i, t)
            for j in range(t, n):
                if a[t][j] and abs(a[t][j]) < abs(a[best[0]][best[1]]):
                    best = (t, j)
            i, j = best
            a[t], a[i] = a[i], a[t]
            for row in a:
                row[t], row[j] = row[j], row[t]
        diag.append(abs(a[t][t]))
        t += 1
    # normalize to invariant factors d1 | d2 | ...
    for i in range(len(diag)):
        for j in range(i + 1, len(diag)):
            g = gcd(diag[i], diag[j])
            diag[i], diag[j] = g, diag[i] * diag[j] // g
    return diag


def boundary_rows(ec: ExplicitComplex, k: int) -> list[dict[int, int]]:
    """Rows = k-simplices, columns = (k-1)-faces (index into the sorted face list)."""
    faces = [s for s in ec.sorted_simplices() if len(s) == k]
    fidx = {s: i for i, s in enumerate(faces)}
    rows = []
    for s in ec.sorted_simplices():
        if len(s) != k + 1:
            continue
        rows.append({fidx[s[:i] + s[i + 1:]]: (-1) ** i for i in range(len(s))})
    return rows


def reduced_homology(ec: ExplicitComplex, max_simplices: int = 500_000) -> HomologyProfile:
    if len(ec) > max_simplices:
        raise ResourceExhausted(f"{len(ec)} simplices exceed the homology budget {max_simplices}", len(ec))
    if not ec.simplices:
        return HomologyProfile({-1: (1, ())})
    top = ec.dim
    counts = ec.f_vector()
    ranks = {0: 1}  # augmentation C_0 -> Z
    torsion: dict[int, tuple[int, ...]] = {}
    for k in range(1, top + 1):
        inv = smith_invariants(boundary_rows(ec, k))
        ranks[k] = len(inv)
        torsion[k - 1] = tuple(sorted(x for x in inv if x > 1))
    groups = {}
    for k in range(top + 1):
        b = counts[k] - ranks[k] - ranks.get(k + 1, 0)
        groups[k] = (b, torsion.get(k, ()))
    return HomologyProfile(groups)


# ---------------------------------------------------------------------------
# collapses


def greedy_collapse(ec: ExplicitComplex) -> tuple[ExplicitComplex, bool]:
    """Remove free pairs, lowest dimension first, until none remain."""
    alive = set(ec.simplices)
    cofaces: dict[tuple[int, ...], set[tuple[int, ...]]] = {s: set() for s in alive}
    for s in alive:
        if len(s) > 1:
            for i in range(len(s)):
                cofaces[s[:i] + s[i + 1:]].add(s)
    heap = [(len(s), s) for s in alive if len(cofaces[s]) == 1]
    heapq.heapify(heap)

    def drop(s):
        alive.discard(s)
        if len(s) > 1:
            for i in range(len(s)):
                f = s[:i] + s[i + 1:]
                cofaces[f].discard(s)
                if len(cofaces[f]) == 1:
                    heapq.heappush(heap, (len(f), f))

    while heap:
        _, s = heapq.heappop(heap)
        if s not in alive or len(cofaces[s]) != 1:
            continue
        (t,) = cofaces[s]
        drop(t)
        drop(s)
    core = ExplicitComplex(ec.vertices, alive, ec.labels)
    return core, len(alive) == 1
