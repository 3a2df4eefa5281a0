import copy
import json
import math
import random
from fractions import Fraction

import pytest

from hyperrips.cayley import Ball
from hyperrips.contraction import (ContractionConfig, arithmetic_checks, base_point, contract, contraction_step,
                                   required_d, seeded_instance, trace_to_dict, verify_trace)
from hyperrips.equivariant import orbit_diameter, subgroup_closure, trivial_subgroup
from hyperrips.errors import CertificateFailure, ResourceExhausted, ValidationError
from hyperrips.groups import free_group, free_product, infinite_dihedral
from oracles import free_reduce

DINF = infinite_dihedral()
F2 = free_group(2)
Z2Z3 = free_product(2, 3)


def dinf_setup(x0=None, radius=30):
    H = subgroup_closure(DINF, [DINF.element("a")])
    ball = Ball(DINF, radius)
    return H, ContractionConfig.create(H, 20, 0, ball, x0=x0)


def test_arithmetic_thresholds():
    assert required_d(0) == 20 and required_d(Fraction(1, 2)) == 36
    assert all(c.ok for c in arithmetic_checks(20, 0))
    assert not all(c.ok for c in arithmetic_checks(19, 0))
    # the three floor facts follow from d >= 32 delta + 20 for every half-integer delta
    for k in range(0, 12):
        delta = Fraction(k, 2)
        d = int(required_d(delta))
        assert all(c.ok for c in arithmetic_checks(d, delta))


def test_config_validation():
    H = trivial_subgroup(DINF)
    with pytest.raises(ValidationError):
        ContractionConfig.create(H, 19, 0, Ball(DINF, 30))
    with pytest.raises(ValidationError):
        ContractionConfig.create(H, 40, Fraction(1, 3), Ball(DINF, 30))
    cfg = ContractionConfig.create(H, 19, 0, Ball(DINF, 30), unsafe=True)
    assert cfg.unsafe and not cfg.checks[0].ok
    with pytest.raises(CertificateFailure):  # d(Hx0) = 5 > 4
        ContractionConfig.create(subgroup_closure(DINF, [DINF.element("a")]), 20, 0, Ball(DINF, 30),
                                 x0=DINF.element("ba"))


def test_base_point():
    assert base_point(trivial_subgroup(F2), Ball(F2, 10), 0) == F2.identity()
    H, cfg = dinf_setup()
    assert cfg.x0 == DINF.identity() and orbit_diameter(H, cfg.x0, cfg.ball) == 1
    rng = random.Random(4)
    ball = Ball(Z2Z3, 40)
    for _ in range(30):
        g = Z2Z3.element([rng.choice(["a", "b", "b2"]) for _ in range(rng.randint(0, 8))])
        for base in (["a"], ["b"]):
            Hg = subgroup_closure(Z2Z3, [Z2Z3.conjugate(g, Z2Z3.element(w)) for w in base])
            x0 = base_point(Hg, ball, 0)
            assert orbit_diameter(Hg, x0, ball) <= 4


def _check_trace(trace, cfg):
    d, q = cfg.d, cfg.quarter
    assert trace.steps[-1].kind == "cone" and all(s.kind == "move" for s in trace.steps[:-1])
    prev = None
    for s in trace.steps:
        dists = [cfg.ball.distance(cfg.x0, v) for v in s.domain]
        M = max(dists)
        if prev is not None:  # monotone progress
            assert M < prev[0] or (M == prev[0] and dists.count(M) < prev[1])
        prev = (M, dists.count(M))
        if s.kind == "move":
            assert cfg.ball.distance(cfg.x0, s.y0_prime) == s.max_distance - q
            for v in s.moved_orbit:  # the whole orbit ends up closer
                assert cfg.ball.distance(cfg.x0, s.vertex_map[v]) <= s.max_distance - q + 8 * cfg.delta + 4
            o = cfg.oracle
            for h in cfg.H.elements:  # equivariance
                for v in s.domain:
                    assert s.vertex_map[o.multiply(h, v)] == o.multiply(h, s.vertex_map[v])
    assert max(cfg.ball.distance(cfg.x0, v) for v in trace.terminal) * 2 <= d
    M0 = max(cfg.ball.distance(cfg.x0, v) for v in trace.initial)
    if 2 * M0 > d:
        assert len(trace.moves) >= math.ceil((M0 - Fraction(d, 2)) / q)


@pytest.mark.parametrize("seed", range(8))
def test_dinf_equivariant_traces(seed):
    H, cfg = dinf_setup()
    K = seeded_instance(H, cfg, 3, seed)
    trace = contract(K, cfg)
    _check_trace(trace, cfg)
    assert len(trace.steps) == 1  # F lies within d/2 of e here
    assert verify_trace(trace_to_dict(trace)).ok


@pytest.mark.parametrize("seed", range(8))
def test_dinf_equivariant_moves_with_offset_base(seed):
    # x0 = b has d(Hx0) = 3, and F reaches distance 11 from it
    H, cfg = dinf_setup(x0=DINF.element("b"))
    K = seeded_instance(H, cfg, 6, seed)
    trace = contract(K, cfg)
    _check_trace(trace, cfg)
    for s in trace.moves:
        assert len(s.moved_orbit) == 2
        assert all(c.ok for c in s.checks)
    assert verify_trace(json.loads(json.dumps(trace_to_dict(trace)))).ok


def test_offset_base_actually_moves():
    H, cfg = dinf_setup(x0=DINF.element("b"))
    K = [DINF.element("ababababab"), DINF.element("babababab"), DINF.element("b"), DINF.element("ab")]
    trace = contract(K, cfg)
    assert len(trace.moves) >= 1
    assert {s.subcase for s in trace.moves} <= {"a", "b"}


def test_line_moves_are_exactly_a_quarter():
    cfg = ContractionConfig.create(trivial_subgroup(DINF), 20, 0, Ball(DINF, 40))
    K = [DINF.element(w) for w in ["ab" * 15, "ba" * 12, "a", "bab"]]
    trace = contract(K, cfg)
    _check_trace(trace, cfg)
    for s in trace.moves:
        before = cfg.ball.distance(cfg.x0, s.y0)
        after = cfg.ball.distance(cfg.x0, s.y0_prime)
        assert before - after == 5
    assert verify_trace(trace_to_dict(trace)).ok


def test_free_group_nonequivariant_contraction():
    H = trivial_subgroup(F2)
    cfg = ContractionConfig.create(H, 20, 0, Ball(F2, 16))
    K = seeded_instance(H, cfg, 30, 9, max_len=15, min_len=12)
    trace = contract(K, cfg)
    _check_trace(trace, cfg)
    for s in trace.moves:
        assert len(s.moved_orbit) == 1
        # hand check with free reduction: y0' is a prefix of y0, five letters shorter
        assert len(free_reduce(s.y0.word)) - len(free_reduce(s.y0_prime.word)) == 5
        assert s.y0.word[: len(s.y0_prime.word)] == s.y0_prime.word
    assert verify_trace(trace_to_dict(trace)).ok


def test_immediate_cone_and_step_guard():
    H, cfg = dinf_setup()
    trace = contract([cfg.x0], cfg)
    assert len(trace.steps) == 1 and trace.terminal == list(H.elements)
    cfg2 = ContractionConfig.create(trivial_subgroup(DINF), 20, 0, Ball(DINF, 40))
    with pytest.raises(ResourceExhausted) as exc:
        contract([DINF.element("ab" * 15)], cfg2, step_guard=1)
    assert len(exc.value.partial_trace.steps) == 1


def test_engine_aborts_when_delta_is_wrong():
    # unsafe d: the progress chain M - q + 8 delta + 4 < M fails when q <= 4
    cfg = ContractionConfig.create(trivial_subgroup(F2), 12, 0, Ball(F2, 16), unsafe=True)
    with pytest.raises(CertificateFailure) as exc:
        contraction_step([F2.identity(), F2.element("ab" * 4)], cfg)
    assert exc.value.to_dict()["certificate"] == "C5_strict"


def test_domain_outside_F_rejected():
    H, cfg = dinf_setup()
    with pytest.raises(ValidationError):
        contract([DINF.element("bababababab")], cfg)


# -- verifier mutations ------------------------------------------------------------

def _move_trace():
    cfg = ContractionConfig.create(trivial_subgroup(DINF), 20, 0, Ball(DINF, 40))
    K = [DINF.element(w) for w in ["ab" * 9, "ba" * 8, "a"]]
    return trace_to_dict(contract(K, cfg))


def _step_by_generator(word, label):
    return str(DINF.multiply(DINF.element(word), DINF.element(label)))


def test_perturbed_target_image_is_rejected():
    data = _move_trace()
    bad = copy.deepcopy(data)
    st = bad["steps"][0]
    for pair in st["vertex_map"]:
        if pair[0] == st["y0"]:
            pair[1] = _step_by_generator(pair[1], "a")
    res = verify_trace(bad)
    assert not res.ok
    assert res.failure_names() & {"C0_offset", "C0_geodesic", "C3", "C5"}


def test_perturbed_fixed_vertex_is_rejected():
    data = _move_trace()
    bad = copy.deepcopy(data)
    st = bad["steps"][0]
    pair = next(p for p in st["vertex_map"] if p[0] != st["y0"])
    pair[1] = _step_by_generator(pair[1], "b")
    res = verify_trace(bad)
    assert "map_form" in res.failure_names()


def test_inflated_terminal_is_rejected():
    data = _move_trace()
    bad = copy.deepcopy(data)
    bad["terminal"].append("ab" * 7)
    res = verify_trace(bad)
    assert "cone" in res.failure_names()


def test_tampered_certificate_record_is_rejected():
    data = _move_trace()
    bad = copy.deepcopy(data)
    bad["steps"][0]["certificates"]["C5"]["lhs"] = 0
    assert "C5_record" in verify_trace(bad).failure_names()


def test_unknown_format_is_rejected():
    assert verify_trace({"format": "other"}).first_failure[1] == "format"
