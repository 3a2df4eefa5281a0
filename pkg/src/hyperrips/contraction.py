"""Equivariant contraction of finite H-invariant vertex sets of F.

Starting from a finite H-invariant vertex set K containing the base vertex
x0, each *move* step pushes the orbit of a furthest vertex y0 a quarter of
the Rips parameter along a geodesic towards x0.  Once every vertex lies
within d/2 of x0 the set spans an H-invariant simplex and a *cone* step
finishes the trace.

Every step records the inequalities that make it valid.  The engine aborts
on the first false one; :func:`verify_trace` re-derives all of them from a
serialized trace and raw distance queries only.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .cayley import Ball, diameter, orbit, set_distance
from .certificates import Check, flag, num
from .equivariant import SubgroupRecord, orbit_diameter, small_orbit_vertex, subgroup_closure
from .errors import CertificateFailure, ResourceExhausted, ValidationError
from .groups import GroupElement, GroupOracle, GroupSpec, load_group

TRACE_FORMAT = "hyperrips-trace/1"


def required_d(delta) -> Fraction:
    return 32 * Fraction(delta) + 20


def arithmetic_checks(d: int, delta) -> list[Check]:
    """The three facts about floor(d/4) used along the way."""
    delta = Fraction(delta)
    q = d // 4
    return [
        Check("d_threshold", d, ">=", required_d(delta)),
        Check("quarter_ge_4delta_plus_1", q, ">=", 4 * delta + 1),
        Check("quarter_ge_2delta", q, ">=", 2 * delta),
        Check("quarter_gt_8delta_plus_4", q, ">", 8 * delta + 4),
    ]


@dataclass
class ContractionConfig:
    d: int
    delta: Fraction
    H: SubgroupRecord
    x0: GroupElement
    ball: Ball
    unsafe: bool = False
    checks: list[Check] = field(default_factory=list)

    @property
    def oracle(self) -> GroupOracle:
        return self.ball.oracle

    @property
    def quarter(self) -> int:
        return self.d // 4

    @classmethod
    def create(cls, H: SubgroupRecord, d: int, delta, ball: Ball, x0: GroupElement | None = None,
               unsafe: bool = False) -> "ContractionConfig":
        delta = Fraction(delta)
        if delta < 0 or (2 * delta).denominator != 1:
            raise ValidationError("delta", "must be a non-negative half-integer")
        checks = arithmetic_checks(d, delta)
        if not unsafe:
            for c in checks:
                if not c.ok:
                    raise ValidationError("d", f"{c.name}: {c.lhs} {c.rel} {c.rhs} fails (need d >= 32*delta+20)")
        if x0 is None:
            x0 = base_point(H, ball, delta)
        ball.require(x0)
        c = Check("base_orbit_small", orbit_diameter(H, x0, ball), "<=", 8 * delta + 4)
        if not c.ok:
            raise CertificateFailure(c.name, f"d(Hx0) = {c.lhs} > 8*delta+4 = {c.rhs}")
        checks.append(c)
        return cls(d, delta, H, x0, ball, unsafe, checks)


def base_point(H: SubgroupRecord, ball: Ball, delta) -> GroupElement:
    """x0 with d(Hx0) <= 8 delta + 4, from the small-orbit construction at y0 = e."""
    x, _ = small_orbit_vertex(H, ball.oracle.identity(), delta, ball)
    return x


@dataclass
class ContractionStep:
    index: int
    kind: str  # "move" | "cone"
    domain: list[GroupElement]
    checks: list[Check]
    y0: GroupElement | None = None
    y0_prime: GroupElement | None = None
    moved_orbit: list[GroupElement] = field(default_factory=list)
    target_orbit: list[GroupElement] = field(default_factory=list)
    vertex_map: dict[GroupElement, GroupElement] = field(default_factory=dict)
    image: list[GroupElement] = field(default_factory=list)
    subcase: str | None = None
    max_distance: int = 0

    def failed(self) -> list[Check]:
        return [c for c in self.checks if not c.ok]


@dataclass
class ContractionTrace:
    config: ContractionConfig
    initial: list[GroupElement]
    steps: list[ContractionStep]
    terminal: list[GroupElement]

    @property
    def moves(self) -> list[ContractionStep]:
        return [s for s in self.steps if s.kind == "move"]


# ---------------------------------------------------------------------------
# engine


def _pair_orbit_diameter(H, u, v, ball) -> int:
    """d(H{u, v}): the diameter of Hu ∪ Hv."""
    o = ball.oracle
    m = max(orbit_diameter(H, u, ball), orbit_diameter(H, v, ball))
    if u != v:
        m = max(m, max(ball.distance(u, o.multiply(h, v)) for h in H.elements))
    return m


def _F_edges(K: Sequence[GroupElement], H, d, ball) -> list[tuple[GroupElement, GroupElement]]:
    """Vertex pairs (and singletons) of K spanning a simplex of F."""
    edges = []
    for i, u in enumerate(K):
        edges.append((u, u))
        for v in K[i + 1:]:
            if ball.distance(u, v) <= d and _pair_orbit_diameter(H, u, v, ball) <= d:
                edges.append((u, v))
    return edges


def domain_checks(K: Sequence[GroupElement], cfg: ContractionConfig) -> list[Check]:
    o, ball, H = cfg.oracle, cfg.ball, cfg.H
    Ks = set(K)
    invariant = all(o.multiply(h, v) in Ks for h in H.elements for v in K)
    worst = max(orbit_diameter(H, v, ball) for v in K)
    return [
        flag("domain_has_base", cfg.x0 in Ks),
        flag("domain_invariant", invariant),
        Check("domain_in_F", worst, "<=", cfg.d),
    ]


def contraction_step(K: Sequence[GroupElement], cfg: ContractionConfig, index: int = 0) -> ContractionStep:
    o, ball, H, d = cfg.oracle, cfg.ball, cfg.H, cfg.d
    K = o.sorted(set(K))
    checks = domain_checks(K, cfg)
    M = max(ball.distance(cfg.x0, y) for y in K)
    if 2 * M <= d:
        checks += cone_checks(K, cfg)
        step = ContractionStep(index, "cone", K, checks, max_distance=M)
    else:
        step = _move_step(K, M, cfg, index, checks)
    bad = step.failed()
    if bad:
        c = bad[0]
        raise CertificateFailure(c.name, f"{c.lhs} {c.rel} {c.rhs} is false at step {index}", step=index,
                                 data={c.name: c.to_dict()})
    return step


def cone_checks(K: Sequence[GroupElement], cfg: ContractionConfig) -> list[Check]:
    o, ball, H, d = cfg.oracle, cfg.ball, cfg.H, cfg.d
    Ks = set(K)
    M = max(ball.distance(cfg.x0, y) for y in K)
    return [
        Check("cone_radius", M, "<=", Fraction(d, 2)),
        Check("cone_diameter", diameter(ball, K), "<=", d),
        flag("cone_invariant", all(o.multiply(h, v) in Ks for h in H.elements for v in K)),
    ]


def _move_step(K, M, cfg: ContractionConfig, index: int, checks: list[Check]) -> ContractionStep:
    o, ball, H, d, delta, q = cfg.oracle, cfg.ball, cfg.H, cfg.d, cfg.delta, cfg.quarter
    x0 = cfg.x0
    y0 = next(y for y in K if ball.distance(x0, y) == M)  # K is in canonical order
    path = ball.geodesic(x0, y0)
    y0p = path.at(M - q)
    moved = orbit(o, H.elements, y0)
    fmap = {v: v for v in K}
    for h in H.elements:
        fmap[o.multiply(h, y0)] = o.multiply(h, y0p)
    target = o.sorted({fmap[v] for v in moved})
    image = o.sorted(set(fmap.values()))
    checks += move_checks(K, fmap, y0, y0p, M, cfg)
    subcase, extra = subcase_checks(y0, M, cfg)
    checks += extra
    return ContractionStep(index, "move", K, checks, y0, y0p, moved, target, fmap, image, subcase, M)


def subcase_checks(y0, M, cfg: ContractionConfig) -> tuple[str, list[Check]]:
    """Which branch of the target-in-F argument applies, with its intermediate bounds."""
    o, ball, H, d, delta, q = cfg.oracle, cfg.ball, cfg.H, cfg.d, cfg.delta, cfg.quarter
    moved = orbit(o, H.elements, y0)
    if 2 * diameter(ball, moved) <= d:
        return "a", [Check("C2a_triangle_bound", 2 * q + Fraction(d, 2), "<=", d)]
    x, _ = small_orbit_vertex(H, y0, delta, ball, x0=cfg.x0, strict=False)
    hx = orbit(o, H.elements, x)
    return "b", [
        Check("C2b_small_orbit", diameter(ball, hx), "<=", 8 * delta + 4),
        Check("C2b_near_y0", set_distance(ball, hx, [y0]), "<=", Fraction(d, 2) + 2 * delta + 1),
        Check("C2b_near_base", set_distance(ball, hx, [cfg.x0]), "<=", M),
    ]


def move_checks(K, fmap, y0, y0p, M, cfg: ContractionConfig) -> list[Check]:
    """C0-C5 for a move hy0 -> hy0'; shared verbatim by engine and verifier."""
    o, ball, H, d, delta, q = cfg.oracle, cfg.ball, cfg.H, cfg.d, cfg.delta, cfg.quarter
    x0 = cfg.x0
    hy0 = [o.multiply(h, y0) for h in H.elements]
    hy0p = [o.multiply(h, y0p) for h in H.elements]
    moved = set(hy0)
    expected = dict(zip(hy0, hy0p))
    out = [
        Check("C0_offset", ball.distance(x0, y0p), "==", M - q),
        Check("C0_geodesic", ball.distance(x0, y0p) + ball.distance(y0p, y0), "==", M),
        flag("map_form", set(fmap) == set(K) and all(fmap[v] == expected.get(v, v) for v in K)),
        flag("C1", x0 not in moved),
        Check("C2", diameter(ball, hy0p), "<=", d),
    ]
    worst3 = 0
    for y in K:
        for a, b in zip(hy0, hy0p):
            if ball.distance(y, a) <= d:
                worst3 = max(worst3, ball.distance(y, b))
    out.append(Check("C3", worst3, "<=", d))
    worst4 = 0
    for u, v in _F_edges(K, H, d, ball):
        pts = {u, v, fmap[u], fmap[v]}
        for a in pts:
            for b in pts:
                worst4 = max(worst4, _pair_orbit_diameter(H, a, b, ball))
    out.append(Check("C4", worst4, "<=", d))
    bound = M - q + 8 * delta + 4
    out.append(Check("C5", max(ball.distance(fmap[v], x0) for v in hy0), "<=", bound))
    out.append(Check("C5_strict", bound, "<", M))
    out.append(flag("equivariance", all(
        fmap.get(o.multiply(h, v)) == o.multiply(h, fmap[v]) for h in H.elements for v in K)))
    return out


def contract(K0: Iterable[GroupElement], cfg: ContractionConfig, step_guard: int | None = None) -> ContractionTrace:
    o, H = cfg.oracle, cfg.H
    K = {o.multiply(h, v) for h in H.elements for v in list(K0) + [cfg.x0]}
    K = o.sorted(K)
    for v in K:
        cfg.ball.require(v)
        if orbit_diameter(H, v, cfg.ball) > cfg.d:
            raise ValidationError("K", f"vertex {v} is not in F: d(Hv) > {cfg.d}")
    if step_guard is None:
        step_guard = len(K) * max(1, max(cfg.ball.distance(cfg.x0, v) for v in K)) + 1
    steps: list[ContractionStep] = []
    trace = ContractionTrace(cfg, K, steps, [])
    cur = K
    while True:
        if len(steps) >= step_guard:
            err = ResourceExhausted(f"contraction did not finish within {step_guard} steps", len(steps))
            err.partial_trace = trace
            raise err
        step = contraction_step(cur, cfg, len(steps))
        steps.append(step)
        if step.kind == "cone":
            trace.terminal = step.domain
            return trace
        cur = step.image


# ---------------------------------------------------------------------------
# serialization


def trace_to_dict(trace: ContractionTrace) -> dict:
    cfg = trace.config
    s = str
    steps = []
    for st in trace.steps:
        item = {"index": st.index, "kind": st.kind, "max_distance": st.max_distance}
        if st.kind == "move":
            item.update({
                "y0": s(st.y0), "y0_prime": s(st.y0_prime),
                "moved_orbit": [s(v) for v in st.moved_orbit],
                "target_orbit": [s(v) for v in st.target_orbit],
                "subcase": st.subcase,
                "vertex_map": [[s(v), s(st.vertex_map[v])] for v in st.domain],
                "image": [s(v) for v in st.image],
            })
        item["certificates"] = {c.name: c.to_dict() for c in st.checks}
        steps.append(item)
    return {
        "format": TRACE_FORMAT,
        "group": cfg.oracle.spec.to_dict(),
        "config": {
            "d": cfg.d,
            "delta": num(cfg.delta),
            "subgroup": cfg.H.words(),
            "x0": s(cfg.x0),
            "ball_radius": cfg.ball.radius,
            "unsafe": cfg.unsafe,
            "certificates": {c.name: c.to_dict() for c in cfg.checks},
        },
        "initial": [s(v) for v in trace.initial],
        "steps": steps,
        "terminal": [s(v) for v in trace.terminal],
    }


# ---------------------------------------------------------------------------
# independent verification


@dataclass
class VerifyResult:
    ok: bool
    failures: list[tuple[int | None, str, str]]
    steps_checked: int

    @property
    def first_failure(self):
        return self.failures[0] if self.failures else None

    def failure_names(self) -> set[str]:
        return {f[1] for f in self.failures}

    def to_dict(self) -> dict:
        return {"ok": self.ok, "steps_checked": self.steps_checked,
                "failures": [{"step": s, "certificate": n, "detail": d} for s, n, d in self.failures]}


def verify_trace(data: dict, ball: Ball | None = None) -> VerifyResult:
    """Re-check a serialized trace from scratch.

    Only the group spec, the recorded vertices and fresh distance queries
    are trusted; recorded certificate values are compared, never reused.
    """
    failures: list[tuple[int | None, str, str]] = []

    def fail(step, name, detail):
        failures.append((step, name, detail))

    if data.get("format") != TRACE_FORMAT:
        return VerifyResult(False, [(None, "format", f"unknown format {data.get('format')!r}")], 0)
    spec = GroupSpec.from_dict(data["group"])
    conf = data["config"]
    if ball is None:
        ball = Ball(load_group(spec), conf["ball_radius"])
    o = ball.oracle
    el = o.element
    d = int(conf["d"])
    delta = Fraction(conf["delta"])
    q = d // 4
    Hel = [el(w) for w in conf["subgroup"]]
    H = SubgroupRecord.from_elements(o, Hel)
    if set(subgroup_closure(o, Hel, order_guard=max(2 * len(Hel), 2)).elements) != set(Hel):
        fail(None, "subgroup", "recorded elements are not a subgroup")
        return VerifyResult(False, failures, 0)
    x0 = el(conf["x0"])
    for c in arithmetic_checks(d, delta):
        if not c.ok and not conf.get("unsafe"):
            fail(None, c.name, f"{c.lhs} {c.rel} {c.rhs}")
    if orbit_diameter(H, x0, ball) > 8 * delta + 4:
        fail(None, "base_orbit_small", f"d(Hx0) > 8*delta+4")
    cfg = ContractionConfig(d, delta, H, x0, ball, bool(conf.get("unsafe")))

    cur = o.sorted({el(w) for w in data["initial"]})
    steps = data["steps"]
    if not steps or steps[-1]["kind"] != "cone":
        fail(None, "terminal", "trace does not end in a cone step")
    for i, st in enumerate(steps):
        if st.get("index") != i:
            fail(i, "chain", "step indices out of order")
        for c in domain_checks(cur, cfg):
            if not c.ok:
                fail(i, c.name, f"{c.lhs} {c.rel} {c.rhs}")
        M = max(ball.distance(x0, y) for y in cur)
        if st["kind"] == "cone":
            terminal = o.sorted({el(w) for w in data["terminal"]})
            for c in cone_checks(terminal, cfg):
                if not c.ok:
                    fail(i, "cone", f"{c.name}: {c.lhs} {c.rel} {c.rhs}")
            if terminal != cur:
                fail(i, "chain", "terminal simplex differs from the current vertex set")
            if i != len(steps) - 1:
                fail(i, "terminal", "cone step before the end of the trace")
            _compare_records(i, st, cone_checks(cur, cfg), fail)
            continue
        if 2 * M <= d:
            fail(i, "case", "move step although every vertex is within d/2 of x0")
        y0, y0p = el(st["y0"]), el(st["y0_prime"])
        furthest = [y for y in cur if ball.distance(x0, y) == M]
        if not furthest or furthest[0] != y0:
            fail(i, "y0_choice", f"recorded y0={y0} is not the first furthest vertex")
        if y0 not in cur:
            fail(i, "chain", f"recorded y0={y0} is not in the current vertex set")
            break
        fmap = {}
        for src, dst in st["vertex_map"]:
            fmap[el(src)] = el(dst)
        if set(fmap) != set(cur):
            fail(i, "chain", "vertex map domain differs from the current vertex set")
            fmap = {v: fmap.get(v, v) for v in cur}
        if fmap.get(y0) != y0p:
            fail(i, "map_form", "f(y0) differs from the recorded y0_prime")
        # judge the map as recorded: y0' := f(y0)
        checks = move_checks(cur, fmap, y0, fmap[y0], M, cfg)
        sub, extra = subcase_checks(y0, M, cfg)
        if st.get("subcase") != sub:
            fail(i, "C2_subcase", f"recorded subcase {st.get('subcase')!r}, recomputed {sub!r}")
        checks += extra
        for c in checks:
            if not c.ok:
                fail(i, c.name, f"{c.lhs} {c.rel} {c.rhs}")
        _compare_records(i, st, checks, fail)
        image = o.sorted(set(fmap.values()))
        if [str(v) for v in image] != st["image"]:
            fail(i, "image", "recorded image differs from f(K)")
            image = o.sorted({el(w) for w in st["image"]})  # judge later steps on their own terms
        cur = image
    return VerifyResult(not failures, failures, len(steps))


def _compare_records(i, st, checks, fail):
    rec = st.get("certificates", {})
    for c in checks:
        r = rec.get(c.name)
        if r is None:
            fail(i, c.name + "_record", "certificate missing from trace")
        elif r != c.to_dict():
            fail(i, c.name + "_record", f"recorded {r} but recomputed {c.to_dict()}")


# ---------------------------------------------------------------------------
# seeding


def random_F_vertices(H: SubgroupRecord, ball: Ball, d: int, n: int, rng: random.Random,
                      max_len: int | None = None, min_len: int = 0, tries: int = 10_000) -> list[GroupElement]:
    """n distinct random vertices v with min_len <= |v| <= max_len and d(Hv) <= d.

    Each vertex is the end of a random geodesic from e: every step multiplies
    by a generator chosen uniformly among those that increase the length.
    """
    o = ball.oracle
    gens = o.generators()
    max_len = ball.radius if max_len is None else min(max_len, ball.radius)
    out: dict[GroupElement, None] = {}
    for _ in range(tries):
        if len(out) >= n:
            break
        target = rng.randint(min(min_len, max_len), max_len)
        v, k = o.identity(), 0
        while k < target:
            ups = [w for w in (o.multiply(v, gens.elements[g]) for g in gens.items) if ball.length(w) == k + 1]
            if not ups:
                break
            v, k = rng.choice(ups), k + 1
        if any(not ball.contains(o.multiply(h, v)) for h in H.elements):
            continue
        if orbit_diameter(H, v, ball) <= d:
            out[v] = None
    return o.sorted(out)


def seeded_instance(H: SubgroupRecord, cfg: ContractionConfig, n: int, seed: int,
                    max_len: int | None = None, min_len: int = 0) -> list[GroupElement]:
    rng = random.Random(seed)
    verts = random_F_vertices(H, cfg.ball, cfg.d, n, rng, max_len, min_len)
    o = cfg.oracle
    return o.sorted({o.multiply(h, v) for h in H.elements for v in verts + [cfg.x0]})
