"""Exact four-point hyperbolicity of finite metric snapshots.

Defects are kept as integers ``2 * delta`` internally; the public value is
a :class:`fractions.Fraction` with denominator 1 or 2.

The pruned search enumerates pairs ``(x, y)`` by decreasing distance and
pairs each with every later (shorter) pair ``(z, t)``.  For the pairing with
the largest sum, the defect is at most ``min(d(x, y), d(z, t))``, so once a
partner pair is no longer than the best defect found, nothing further down
the list can improve it.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .cayley import Ball


@dataclass(frozen=True)
class Budget:
    max_quadruples: int | None = None
    max_seconds: float | None = None


@dataclass
class DeltaReport:
    delta_numerator: int
    witness: tuple[str, str, str, str] | None
    ball_radius: int | None
    quadruples_examined: int
    exhaustive: bool
    elapsed: float = field(default=0.0, compare=False)
    witness_indices: tuple[int, int, int, int] | None = field(default=None, compare=False)

    @property
    def delta(self) -> Fraction:
        return Fraction(self.delta_numerator, 2)

    def to_dict(self, with_timing: bool = False) -> dict:
        d = {
            "delta_numerator": self.delta_numerator,
            "denominator": 2,
            "witness": list(self.witness) if self.witness else None,
            "radius": self.ball_radius,
            "exhaustive": self.exhaustive,
            "quadruples": self.quadruples_examined,
        }
        if with_timing:
            d["millis"] = round(self.elapsed * 1000)
        return d


def _defect2(s1, s2, s3):
    """Largest minus middle of three pairing sums (works on arrays)."""
    hi = np.maximum(np.maximum(s1, s2), s3)
    lo = np.minimum(np.minimum(s1, s2), s3)
    return hi - (s1 + s2 + s3 - hi - lo)


def quadruple_defect(dist, x, y, z, t) -> Fraction:
    """Least delta for which the four-point inequality holds on {x, y, z, t}."""
    s = sorted((dist(x, y) + dist(z, t), dist(x, z) + dist(y, t), dist(x, t) + dist(y, z)), reverse=True)
    return Fraction(s[0] - s[1], 2)


def naive_delta(D: np.ndarray) -> tuple[int, tuple[int, int, int, int] | None]:
    """Reference O(n^4) scan; returns (2*delta, witness indices)."""
    D = np.asarray(D, dtype=np.int64)
    n = len(D)
    best, witness = 0, None
    for i in range(n):
        row = D[i]
        # axes (j, k, l) for the quadruple (i, j, k, l)
        s1 = row[:, None, None] + D[None, :, :]
        s2 = row[None, :, None] + D[:, None, :]
        s3 = row[None, None, :] + D[:, :, None]
        df = _defect2(s1, s2, s3)
        m = int(df.max())
        if m > best:
            best = m
            j, k, l = np.unravel_index(int(df.argmax()), df.shape)
            witness = (i, int(j), int(k), int(l))
    return best, witness


def _sorted_pairs(D: np.ndarray):
    n = len(D)
    iu, ju = np.triu_indices(n, k=1)
    d = D[iu, ju]
    # decreasing distance; ties broken toward larger indices (further out in a ball)
    order = np.lexsort((-ju, -iu, -d))
    return iu[order], ju[order], d[order]


def _scan(D, px, py, pd, outer, best, deadline, quad_cap):
    """Pruned scan of the given outer pair indices; returns (best2, witness, count, complete)."""
    witness, count = None, 0
    neg = -pd
    for a in outer:
        da = int(pd[a])
        if da <= best:
            break
        # partners b > a with d_b > best
        cut = int(np.searchsorted(neg, -best, side="left"))
        if cut <= a + 1:
            continue
        x, y = px[a], py[a]
        zs, ts = px[a + 1:cut], py[a + 1:cut]
        s1 = da + pd[a + 1:cut]
        s2 = D[x, zs] + D[y, ts]
        s3 = D[x, ts] + D[y, zs]
        df = _defect2(s1, s2, s3)
        count += len(df)
        m = int(df.max())
        if m > best:
            best = m
            k = int(df.argmax())
            witness = (int(x), int(y), int(zs[k]), int(ts[k]))
        if quad_cap is not None and count >= quad_cap:
            return best, witness, count, False
        if deadline is not None and time.perf_counter() > deadline:
            return best, witness, count, False
    return best, witness, count, True


def pruned_delta(D: np.ndarray, budget: Budget | None = None, workers: int = 1):
    """Returns (2*delta, witness indices, quadruples examined, exhaustive)."""
    D = np.asarray(D, dtype=np.int64)
    if len(D) < 4:
        return 0, None, 0, True
    budget = budget or Budget()
    deadline = None if budget.max_seconds is None else time.perf_counter() + budget.max_seconds
    px, py, pd = _sorted_pairs(D)
    m = len(pd)
    if workers <= 1:
        return _scan(D, px, py, pd, range(m), 0, deadline, budget.max_quadruples)
    chunks = [range(w, m, workers) for w in range(workers)]
    cap = None if budget.max_quadruples is None else max(1, budget.max_quadruples // workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(lambda c: _scan(D, px, py, pd, c, 0, deadline, cap), chunks))
    best, witness = 0, None
    for b, w, _, _ in results:  # merge in chunk order: independent of scheduling
        if b > best:
            best, witness = b, w
    return best, witness, sum(r[2] for r in results), all(r[3] for r in results)


def delta_of_matrix(D: np.ndarray, labels: Sequence[str] | None = None, budget: Budget | None = None,
                    workers: int = 1, radius: int | None = None) -> DeltaReport:
    t0 = time.perf_counter()
    best, w, count, complete = pruned_delta(D, budget, workers)
    if w is None and len(D) >= 4:
        w = (0, 1, 2, 3)
    names = None
    if w is not None:
        names = tuple(labels[i] for i in w) if labels is not None else tuple(str(i) for i in w)
    return DeltaReport(best, names, radius, count, complete, time.perf_counter() - t0, w)


def delta_of_ball(ball: Ball, budget: Budget | None = None, workers: int = 1) -> DeltaReport:
    return delta_of_matrix(ball.distance_matrix(), ball.labels(), budget, workers, ball.radius)


def check_delta(D, delta) -> tuple[int, int, int, int] | None:
    """A quadruple (indices) violating the four-point inequality at ``delta``, or None."""
    if isinstance(D, Ball):
        D = D.distance_matrix()
    D = np.asarray(D, dtype=np.int64)
    threshold = Fraction(delta) * 2
    if threshold.denominator != 1:
        threshold = threshold.__floor__()
    threshold = int(threshold)
    if len(D) < 4 or threshold < 0:
        return None if len(D) < 4 else (0, 1, 2, 3)
    px, py, pd = _sorted_pairs(D)
    best, w, _, _ = _scan(D, px, py, pd, range(len(pd)), threshold, None, None)
    return w if best > threshold else None
