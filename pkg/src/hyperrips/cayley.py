"""Finite windows on the Cayley graph: balls, word distances, geodesics.

All distances are exact integers.  Every query runs inside a :class:`Ball`
of fixed radius around the identity; a vertex outside it raises
:class:`OutOfRange` instead of being silently truncated.

Note the set distance here is the max-max convention,
``d(K, L) = max d(k, l)``, so ``diameter(K) == set_distance(K, K)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import DomainError, OutOfRange, ResourceExhausted
from .groups import GroupElement, GroupOracle

Distance = Callable[[GroupElement, GroupElement], int]


class LengthTable:
    """Breadth-first word lengths for generating sets without geodesic normal forms."""

    def __init__(self, oracle: GroupOracle):
        self.oracle = oracle
        e = oracle.identity()
        self.length = {e: 0}
        self.frontier = [e]
        self.radius = 0
        self.exhausted = False

    def extend_to(self, radius: int) -> None:
        gens = self.oracle.generators()
        while self.radius < radius and not self.exhausted:
            nxt = []
            for g in self.frontier:
                for s in gens.items:
                    h = self.oracle.multiply(g, gens.elements[s])
                    if h not in self.length:
                        self.length[h] = self.radius + 1
                        nxt.append(h)
            self.frontier = nxt
            self.radius += 1
            if not nxt:
                self.exhausted = True

    def lookup(self, g: GroupElement, guard: int) -> int:
        n = self.length.get(g)
        while n is None and self.radius < guard and not self.exhausted:
            self.extend_to(self.radius + 1)
            n = self.length.get(g)
        if n is None:
            if self.exhausted:
                raise DomainError(f"{g} is not reachable from the identity")
            raise OutOfRange(f"|{g}| exceeds guard {guard}")
        return n


def word_length(o: GroupOracle, g: GroupElement, guard: int) -> int:
    if o.geodesic_normal_form:
        n = len(g.word)
        if n > guard:
            raise OutOfRange(f"|{g}| = {n} exceeds guard {guard}")
        return n
    table = getattr(o, "_length_table", None)
    if table is None:
        table = LengthTable(o)
        o._length_table = table
    return table.lookup(g, guard)


def word_distance(o: GroupOracle, x: GroupElement, y: GroupElement, guard: int) -> int:
    return word_length(o, o.multiply(o.invert(x), y), guard)


@dataclass(frozen=True)
class GeodesicPath:
    start: GroupElement
    end: GroupElement
    steps: tuple[str, ...]
    vertices: tuple[GroupElement, ...]

    def __len__(self) -> int:
        return len(self.steps)

    def at(self, k: int) -> GroupElement:
        """The vertex at distance k from ``start``."""
        return self.vertices[k]


def geodesic(o: GroupOracle, x: GroupElement, y: GroupElement, guard: int,
             stay_within: Callable[[GroupElement], bool] | None = None) -> GeodesicPath:
    """Lexicographically least geodesic: greedy on the generator label order."""
    gens = o.generators()
    remaining = word_distance(o, x, y, guard)
    cur, steps, verts = x, [], [x]
    while remaining:
        for s in gens.items:
            nxt = o.multiply(cur, gens.elements[s])
            if word_distance(o, nxt, y, guard) == remaining - 1:
                break
        else:  # pragma: no cover - impossible in a Cayley graph
            raise RuntimeError("no distance-decreasing generator")
        if stay_within is not None and not stay_within(nxt):
            raise OutOfRange(f"geodesic [{x}, {y}] leaves the working ball at {nxt}")
        cur = nxt
        steps.append(s)
        verts.append(cur)
        remaining -= 1
    return GeodesicPath(x, y, tuple(steps), tuple(verts))


def set_distance(dist: Distance, K: Iterable, L: Iterable) -> int:
    K, L = list(K), list(L)
    if not K or not L:
        raise ValueError("set distance of an empty set")
    return max(dist(k, l) for k in K for l in L)


def diameter(dist: Distance, K: Iterable) -> int:
    K = list(K)
    return set_distance(dist, K, K)


class Ball:
    """Closed ball B(e, radius) in the word metric.

    Construction is lazy: membership and distance queries never enumerate
    the ball; :attr:`vertices` does, subject to ``size_guard``.
    """

    def __init__(self, oracle: GroupOracle, radius: int, size_guard: int = 200_000):
        if radius < 0:
            raise ValueError("radius must be >= 0")
        self.oracle = oracle
        self.radius = radius
        self.size_guard = size_guard
        self._vertices: list[GroupElement] | None = None
        self._dist_cache: dict[tuple[GroupElement, GroupElement], int] = {}
        self._matrix: np.ndarray | None = None

    # -- membership & metric ------------------------------------------
    def length(self, g: GroupElement) -> int:
        return word_length(self.oracle, g, 2 * self.radius)

    def contains(self, g: GroupElement) -> bool:
        try:
            return word_length(self.oracle, g, self.radius) <= self.radius
        except OutOfRange:
            return False

    def require(self, g: GroupElement) -> GroupElement:
        if not self.contains(g):
            raise OutOfRange(f"{g} lies outside the working ball of radius {self.radius}")
        return g

    def distance(self, x: GroupElement, y: GroupElement) -> int:
        if x == y:
            return 0
        key = (x, y) if self.oracle.key(x) <= self.oracle.key(y) else (y, x)
        d = self._dist_cache.get(key)
        if d is None:
            self.require(x)
            self.require(y)
            d = word_distance(self.oracle, x, y, 2 * self.radius)
            self._dist_cache[key] = d
        return d

    __call__ = distance

    def geodesic(self, x: GroupElement, y: GroupElement) -> GeodesicPath:
        self.require(x)
        self.require(y)
        return geodesic(self.oracle, x, y, 2 * self.radius, stay_within=self.contains)

    def translate(self, g: GroupElement, xs: Iterable[GroupElement]) -> list[GroupElement]:
        return [self.require(self.oracle.multiply(g, x)) for x in xs]

    # -- materialized view ---------------------------------------------
    @property
    def vertices(self) -> list[GroupElement]:
        if self._vertices is None:
            self._vertices = self._enumerate()
            self.index = {v: i for i, v in enumerate(self._vertices)}
        return self._vertices

    def _enumerate(self) -> list[GroupElement]:
        o = self.oracle
        gens = o.generators()
        seen = {o.identity(): 0}
        frontier = [o.identity()]
        for r in range(1, self.radius + 1):
            nxt = []
            for g in frontier:
                for s in gens.items:
                    h = o.multiply(g, gens.elements[s])
                    if h not in seen:
                        seen[h] = r
                        nxt.append(h)
                        if len(seen) > self.size_guard:
                            raise ResourceExhausted(
                                f"ball of radius {self.radius} exceeds {self.size_guard} vertices", len(seen))
            frontier = nxt
            if not nxt:
                break
        self._center_dist = seen
        return sorted(seen, key=lambda g: (seen[g], o.key(g)))

    def __len__(self) -> int:
        return len(self.vertices)

    def index_of(self, g: GroupElement) -> int:
        self.vertices
        try:
            return self.index[g]
        except KeyError:
            raise OutOfRange(f"{g} lies outside the working ball of radius {self.radius}") from None

    @property
    def dist_to_center(self) -> list[int]:
        verts = self.vertices
        return [self._center_dist[v] for v in verts]

    @property
    def adjacency(self) -> list[list[int]]:
        o, gens = self.oracle, self.oracle.generators()
        out = []
        for v in self.vertices:
            nb = set()
            for s in gens.items:
                j = self.index.get(o.multiply(v, gens.elements[s]))
                if j is not None:
                    nb.add(j)
            out.append(sorted(nb))
        return out

    def distance_matrix(self) -> np.ndarray:
        if self._matrix is None:
            verts = self.vertices
            n = len(verts)
            m = np.zeros((n, n), dtype=np.int64)
            for i in range(n):
                for j in range(i + 1, n):
                    m[i, j] = m[j, i] = self.distance(verts[i], verts[j])
            m.setflags(write=False)
            self._matrix = m
        return self._matrix

    def labels(self) -> list[str]:
        return [str(v) for v in self.vertices]


def build_ball(o: GroupOracle, radius: int, size_guard: int = 200_000) -> Ball:
    ball = Ball(o, radius, size_guard)
    ball.vertices
    return ball


def ball_to_dot(ball: Ball, name: str = "ball") -> str:
    lines = [f"graph {name} {{"]
    for i, v in enumerate(ball.vertices):
        lines.append(f'  {i} [label="{v}"];')
    for i, nb in enumerate(ball.adjacency):
        for j in nb:
            if i < j:
                lines.append(f"  {i} -- {j};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def ball_to_table(ball: Ball) -> dict:
    return {
        "radius": ball.radius,
        "vertices": ball.labels(),
        "dist_to_center": ball.dist_to_center,
        "adjacency": ball.adjacency,
        "distances": ball.distance_matrix().tolist(),
    }


def orbit(o: GroupOracle, H: Sequence[GroupElement], x: GroupElement) -> list[GroupElement]:
    """Hx in the canonical element order."""
    return o.sorted({o.multiply(h, x) for h in H})
