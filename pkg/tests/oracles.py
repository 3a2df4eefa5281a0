"""Independent reference implementations the tests compare against.

Nothing here imports the package's algorithms; only plain Python, numpy
matrices and textbook brute force.
"""

from __future__ import annotations

from collections import deque
from itertools import combinations

import numpy as np


def free_reduce(letters):
    """Free reduction of a word over {a, A, b, B, ...} (uppercase = inverse)."""
    out = []
    for x in letters:
        if out and out[-1] == x.swapcase():
            out.pop()
        else:
            out.append(x)
    return tuple(out)


# faithful matrix representations, used as a black-box word problem solver
_DINF = {"a": np.array([[-1, 0], [0, 1]]), "b": np.array([[-1, 1], [0, 1]])}  # x -> -x, x -> 1 - x
_S = np.array([[0, -1], [1, 0]])
_ST = np.array([[0, -1], [1, 1]])
_Z2Z3 = {"a": _S, "b": _ST, "b2": _ST @ _ST}


def dinf_matrix(labels):
    m = np.eye(2, dtype=np.int64)
    for s in labels:
        m = m @ _DINF[s]
    return m


def psl_matrix(labels):
    m = np.eye(2, dtype=np.int64)
    for s in labels:
        m = m @ _Z2Z3[s]
    # PSL(2, Z): normalize the sign
    flat = m.flatten()
    first = next(x for x in flat if x != 0)
    return m if first > 0 else -m


def bfs_distances(start, neighbors, radius):
    """{vertex: distance} for the ball of the given radius."""
    dist = {start: 0}
    q = deque([start])
    while q:
        v = q.popleft()
        if dist[v] == radius:
            continue
        for w in neighbors(v):
            if w not in dist:
                dist[w] = dist[v] + 1
                q.append(w)
    return dist


def graph_distance_matrix(n, edges):
    adj = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    D = np.full((n, n), -1, dtype=np.int64)
    for s in range(n):
        for v, k in bfs_distances(s, lambda x: adj[x], n).items():
            D[s, v] = k
    return D


def brute_delta2(D):
    """2*delta by the textbook quadruple loop."""
    n = len(D)
    best = 0
    for x, y, z, t in combinations(range(n), 4):
        s = sorted((D[x][y] + D[z][t], D[x][z] + D[y][t], D[x][t] + D[y][z]), reverse=True)
        best = max(best, s[0] - s[1])
    return int(best)


def subgroup_lattice(elements, mul):
    """All subgroups of a small finite group, by closure of subsets of generators (pairs suffice for S3/S4 checks)."""
    def close(gens):
        H = set(gens)
        while True:
            new = {mul(a, b) for a in H for b in H} - H
            if not new:
                return frozenset(H)
            H |= new
    identity = next(e for e in elements if all(mul(e, g) == g for g in elements))
    subs = {frozenset([identity])}
    for k in (1, 2):
        for gens in combinations(elements, k):
            subs.add(close(set(gens) | {identity}))
    return subs


def conjugacy_partition(subs, elements, mul, inv):
    classes = []
    seen = set()
    for H in sorted(subs, key=len):
        if H in seen:
            continue
        cls = {frozenset(mul(mul(g, h), inv(g)) for h in H) for g in elements}
        seen |= cls
        classes.append(cls)
    return classes
