"""Command-line front end.

Every command prints one JSON report ``{"manifest": ..., "result": ...}`` to
stdout and writes it, plus any exported artifacts, to the output directory
(``--out``, else ``$HYPERRIPS_OUT``, else ``./hyperrips-out``).  Wall-clock
timings go to a separate ``<command>.timing.json`` so reports stay
byte-identical across runs.

Exit codes: 0 ok, 1 invalid input, 2 certificate or property failure,
3 resource guard exhausted, 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import __version__
from .cayley import Ball, ball_to_dot, ball_to_table, build_ball
from .certificates import num
from .complex import (ExplicitComplex, enumerate_simplices, flag_to_dot, greedy_collapse, parse_faces,
                      reduced_homology, rips_complex)
from .contraction import ContractionConfig, contract, seeded_instance, trace_to_dict, verify_trace
from .equivariant import (conjugacy_classes, enumerate_finite_subgroups, fixed_point_complex,
                          invariant_simplex_poset, rips_theorem_checks, subgroup_closure, trivial_subgroup)
from .errors import CertificateFailure, HyperRipsError, ResourceExhausted, ValidationError
from .groups import GroupElement, GroupOracle, GroupSpec, load_group
from .hyperbolicity import Budget, delta_of_ball

OUT_ENV = "HYPERRIPS_OUT"
EXIT_USAGE = 64
DELTA_BALL_LIMIT = 250  # default δ radius: largest ball (up to radius 10) with at most this many vertices

EXPORTS = {
    "ball": ("dot", "json"),
    "rips": ("dot", "faces", "json"),
    "fixed-points": ("faces", "json"),
    "trace": ("json",),
    "delta": ("json",),
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _jsonable(x):
    if isinstance(x, Fraction):
        return num(x)
    if isinstance(x, GroupElement):
        return str(x)
    if isinstance(x, (set, frozenset, tuple)):
        return list(x)
    if hasattr(x, "tolist"):
        return x.tolist()
    raise TypeError(f"cannot serialize {type(x).__name__}")


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, default=_jsonable) + "\n"


# ---------------------------------------------------------------------------
# shared argument handling


def _read_group(path: str | None) -> GroupOracle:
    if path is None:
        raise UsageError("--group is required")
    try:
        data = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ValidationError("group", f"no such file: {path}")
    except json.JSONDecodeError as e:
        raise ValidationError("group", f"not valid JSON: {e.msg} at line {e.lineno}")
    return load_group(GroupSpec.from_dict(data))


def _subgroup(o: GroupOracle, text: str | None, args):
    if not text:
        return trivial_subgroup(o)
    gens = [o.element(w.strip()) for w in text.split(",") if w.strip()]
    return subgroup_closure(o, gens, order_guard=args.guard_vertices)


def _half_integer(text: str, field: str) -> Fraction:
    try:
        q = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ValidationError(field, f"not a number: {text!r}")
    if q < 0 or (2 * q).denominator != 1:
        raise ValidationError(field, "must be a non-negative multiple of 1/2")
    return q


def default_delta_radius(o: GroupOracle, limit: int = DELTA_BALL_LIMIT, max_radius: int = 10) -> int:
    r = 1
    while r < max_radius:
        try:
            Ball(o, r + 1, limit).vertices
        except ResourceExhausted:
            break
        r += 1
    return r


def _measure_delta(o: GroupOracle, args) -> tuple[Fraction, dict]:
    r = args.delta_radius if args.delta_radius is not None else default_delta_radius(o)
    rep = delta_of_ball(build_ball(o, r, args.guard_vertices), workers=args.workers)
    return rep.delta, rep.to_dict()


def _delta_used(o: GroupOracle, args) -> tuple[Fraction, dict | None]:
    """δ from --delta if given, else measured; plus --delta-margin."""
    margin = _half_integer(args.delta_margin, "delta-margin")
    if args.delta is not None:
        return _half_integer(args.delta, "delta") + margin, None
    measured, rep = _measure_delta(o, args)
    return measured + margin, rep


class Run:
    def __init__(self, command: str, args, o: GroupOracle | None = None):
        self.command = command
        self.args = args
        self.oracle = o
        self.params: dict = {}
        self.timings: dict[str, float] = {}
        self.t0 = time.perf_counter()
        self.out = Path(args.out or os.environ.get(OUT_ENV) or "hyperrips-out")

    def manifest(self) -> dict:
        m = {"command": self.command, "version": __version__}
        if self.oracle is not None:
            m["group"] = self.oracle.spec.to_dict()
            m["group_digest"] = self.oracle.spec.digest()
        m["parameters"] = {k: self.params[k] for k in sorted(self.params)}
        return m

    def write(self, name: str, text: str) -> Path:
        self.out.mkdir(parents=True, exist_ok=True)
        p = self.out / name
        p.write_text(text)
        return p

    def finish(self, result: dict) -> dict:
        report = {"manifest": self.manifest(), "result": result}
        text = dumps(report)
        self.write(f"{self.command}.json", text)
        self.timings["total"] = time.perf_counter() - self.t0
        self.write(f"{self.command}.timing.json",
                   dumps({k: round(v * 1000) for k, v in self.timings.items()} | {"unit": "ms"}))
        sys.stdout.write(text)
        return report


# ---------------------------------------------------------------------------
# commands


def cmd_validate(args) -> int:
    o = _read_group(args.group)
    run = Run("validate", args, o)
    gens = o.generators()
    run.finish({"valid": True, "kind": o.spec.kind, "generators": list(gens.items),
                "inverse": {s: gens.involution[s] for s in gens.items}, "finite": o.is_finite()})
    return 0


def _ball(o, args) -> Ball:
    if args.radius is None:
        raise UsageError("--radius is required")
    return build_ball(o, args.radius, args.guard_vertices)


def build_artifact(kind: str, args) -> tuple[Run, dict, dict[str, str]]:
    """(run, report result, exported texts by format) for an exportable artifact."""
    o = _read_group(args.group)
    run = Run(kind, args, o)
    if kind == "ball":
        ball = _ball(o, args)
        run.params.update(radius=args.radius, guard_vertices=args.guard_vertices)
        table = ball_to_table(ball)
        n_edges = sum(len(nb) for nb in ball.adjacency) // 2
        result = {"radius": ball.radius, "vertex_count": len(ball.vertices), "edge_count": n_edges}
        return run, result, {"dot": ball_to_dot(ball), "json": dumps(table)}
    if kind == "delta":
        ball = _ball(o, args)
        run.params.update(radius=args.radius, guard_vertices=args.guard_vertices,
                          max_quadruples=args.max_quadruples, workers=args.workers)
        t = time.perf_counter()
        rep = delta_of_ball(ball, Budget(max_quadruples=args.max_quadruples), workers=args.workers)
        run.timings["delta"] = time.perf_counter() - t
        result = rep.to_dict() | {"delta": num(rep.delta), "vertex_count": len(ball.vertices)}
        return run, result, {"json": dumps(result)}
    if kind == "rips":
        ball = _ball(o, args)
        d = _need(args.d, "--d")
        run.params.update(radius=args.radius, d=d, max_dim=args.max_dim, guard_vertices=args.guard_vertices)
        fc = rips_complex(ball, d)
        simplices = enumerate_simplices(fc, args.max_dim, args.guard_vertices)
        ec = ExplicitComplex(fc.vertices, simplices, fc.labels)
        result = {"radius": ball.radius, "d": d, "max_dim": args.max_dim, "f_vector": ec.f_vector(),
                  "boundary_effects": bool(getattr(fc, "boundary_effects", False))}
        return run, result, {"dot": flag_to_dot(fc), "faces": ec.to_faces(), "json": dumps(result)}
    if kind == "fixed-points":
        ball = _ball(o, args)
        d = _need(args.d, "--d")
        H = _subgroup(o, args.subgroup, args)
        run.params.update(radius=args.radius, d=d, subgroup=H.words(), guard_vertices=args.guard_vertices)
        poset = invariant_simplex_poset(H, ball, d, args.guard_vertices)
        ec = fixed_point_complex(poset, "orbit", args.guard_vertices)
        result = {"subgroup": H.to_dict(), "d": d, "radius": ball.radius} | _complex_summary(ec)
        result["orbits"] = len(poset.orbits)
        result["poset_size"] = len(poset)
        result["truncated_orbits"] = poset.truncated_orbits
        return run, result, {"faces": ec.to_faces(), "json": dumps(result)}
    if kind == "trace":
        raise UsageError("export trace: run `contract`, which writes trace.json")
    raise UsageError(f"unknown artifact {kind!r}")


def _need(value, flag):
    if value is None:
        raise UsageError(f"{flag} is required")
    return value


def _complex_summary(ec: ExplicitComplex) -> dict:
    hom = reduced_homology(ec)
    _, collapsed = greedy_collapse(ec)
    return {"f_vector": ec.f_vector(), "nonempty": len(ec) > 0, "connected": ec.is_connected(),
            "euler_characteristic": ec.euler_characteristic(), "reduced_homology": hom.to_dict(),
            "homology_trivial": hom.is_trivial() and len(ec) > 0, "collapses_to_point": collapsed}


def _artifact_cmd(kind: str):
    def run_cmd(args) -> int:
        run, result, texts = build_artifact(kind, args)
        if args.format is not None:
            if args.format not in EXPORTS[kind]:
                raise UsageError(f"format {args.format!r} is not available for {kind}")
            ext = {"dot": "dot", "faces": "faces", "json": "data.json"}[args.format]
            p = run.write(f"{kind}.{ext}", texts[args.format])
            result = result | {"export": {"format": args.format, "file": p.name}}
        run.finish(result)
        return 0
    return run_cmd


def cmd_export(args) -> int:
    kind = args.artifact
    if args.format is None:
        raise UsageError("--format is required for export")
    if args.format not in EXPORTS.get(kind, ()):
        raise UsageError(f"cannot export {kind} as {args.format}")
    if kind == "trace":
        if not args.trace:
            raise UsageError("export trace needs --trace <file>")
        data = json.loads(Path(args.trace).read_text())
        run = Run("export", args)
        p = run.write("trace.json", dumps(data))
        run.finish({"artifact": kind, "format": args.format, "file": p.name})
        return 0
    run, _, texts = build_artifact(kind, args)
    ext = {"dot": "dot", "faces": "faces", "json": "data.json"}[args.format]
    p = run.write(f"{kind}.{ext}", texts[args.format])
    run.command = "export"
    run.params.update(artifact=kind, format=args.format)
    run.finish({"artifact": kind, "format": args.format, "file": p.name})
    return 0


def cmd_homology(args) -> int:
    if args.faces:
        run = Run("homology", args)
        ec = parse_faces(Path(args.faces).read_text())
        run.params["faces"] = Path(args.faces).name
    else:
        o = _read_group(args.group)
        run = Run("homology", args, o)
        ball = _ball(o, args)
        d = _need(args.d, "--d")
        run.params.update(radius=args.radius, d=d, max_dim=args.max_dim)
        fc = rips_complex(ball, d)
        ec = ExplicitComplex(fc.vertices, enumerate_simplices(fc, args.max_dim, args.guard_vertices), fc.labels)
    run.finish(_complex_summary(ec))
    return 0


def _subgroup_list(o, args, run):
    delta, rep = _delta_used(o, args)
    run.params.update(delta=num(delta), order_guard=args.guard_vertices)
    subs = enumerate_finite_subgroups(o, delta, order_guard=args.guard_vertices)
    return delta, rep, subs


def cmd_subgroups(args) -> int:
    o = _read_group(args.group)
    run = Run("subgroups", args, o)
    delta, rep, subs = _subgroup_list(o, args, run)
    run.finish({"delta": num(delta), "delta_report": rep, "search_radius": math.floor(8 * delta + 4),
                "count": len(subs), "subgroups": [H.to_dict() for H in subs]})
    return 0


def cmd_classes(args) -> int:
    o = _read_group(args.group)
    run = Run("classes", args, o)
    delta, rep, subs = _subgroup_list(o, args, run)
    cr = args.radius if args.radius is not None else 4
    run.params["conjugator_radius"] = cr
    classes = conjugacy_classes(subs, o, cr)
    nontrivial = [c for c in classes if c.representative.order > 1]
    run.finish({"delta": num(delta), "delta_report": rep, "conjugator_radius": cr,
                "classes": [c.to_dict() for c in classes], "nontrivial_classes": len(nontrivial)})
    return 0


def cmd_check_rips_theorem(args) -> int:
    o = _read_group(args.group)
    run = Run("check-rips-theorem", args, o)
    delta, rep = _delta_used(o, args)
    d = args.d if args.d is not None else int(math.ceil(4 * delta + 2))
    run.params.update(d=d, delta=num(delta), max_dim=args.max_dim, guard_vertices=args.guard_vertices)
    report = rips_theorem_checks(o, d, delta, max_dim=args.max_dim, guard=args.guard_vertices)
    report["delta_report"] = rep
    run.finish(report)
    if not (report["ii_star_disjointness"]["pass"] and report["iv_torsion_free"]["pass"]):
        return 2
    return 0


def cmd_contract(args) -> int:
    o = _read_group(args.group)
    run = Run("contract", args, o)
    d = _need(args.d, "--d")
    delta, rep = _delta_used(o, args)
    H = _subgroup(o, args.subgroup, args)
    radius = args.radius if args.radius is not None else d
    ball = Ball(o, radius, args.guard_vertices)
    run.params.update(d=d, delta=num(delta), subgroup=H.words(), radius=radius, seed=args.seed,
                      seed_vertices=args.seed_vertices, guard_steps=args.guard_steps, unsafe_d=args.unsafe_d)
    cfg = ContractionConfig.create(H, d, delta, ball, unsafe=args.unsafe_d)
    K0 = seeded_instance(H, cfg, args.seed_vertices, args.seed)
    t = time.perf_counter()
    try:
        trace = contract(K0, cfg, args.guard_steps)
    except ResourceExhausted as e:
        partial = getattr(e, "partial_trace", None)
        if partial is not None:
            run.write("trace.partial.json", dumps(trace_to_dict(partial)))
        raise
    run.timings["contract"] = time.perf_counter() - t
    data = trace_to_dict(trace)
    run.write("trace.json", dumps(data))
    t = time.perf_counter()
    ver = verify_trace(json.loads(dumps(data)))
    run.timings["verify"] = time.perf_counter() - t
    moves = trace.moves
    result = {
        "subgroup": H.to_dict(),
        "delta_used": num(delta),
        "delta_report": rep,
        "x0": str(cfg.x0),
        "unsafe_d": bool(args.unsafe_d),
        "initial_size": len(trace.initial),
        "steps": len(trace.steps),
        "moves": len(moves),
        "terminal": [str(v) for v in trace.terminal],
        "trace_file": "trace.json",
        "verify": ver.to_dict(),
    }
    if args.unsafe_d:
        result["watermark"] = "UNSAFE: d below 32*delta+20; outside the range where contraction is guaranteed"
    run.finish(result)
    return 0 if ver.ok else 2


def cmd_verify(args) -> int:
    if not args.trace:
        raise UsageError("--trace is required")
    try:
        data = json.loads(Path(args.trace).read_text())
    except (FileNotFoundError, json.JSONDecodeError) as e:
        raise ValidationError("trace", str(e))
    run = Run("verify", args)
    run.params["trace"] = Path(args.trace).name
    ver = verify_trace(data)
    run.finish(ver.to_dict())
    return 0 if ver.ok else 2


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--group", help="group spec (JSON)")
    common.add_argument("--radius", type=int)
    common.add_argument("--d", type=int, help="Rips parameter")
    common.add_argument("--delta", help="use this delta instead of measuring it")
    common.add_argument("--delta-radius", type=int, help="ball radius for measuring delta")
    common.add_argument("--delta-margin", default="0", help="added to delta (multiple of 1/2)")
    common.add_argument("--subgroup", help="comma-separated generator words")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--seed-vertices", type=int, default=3, help="random F-vertices seeding K")
    common.add_argument("--guard-vertices", type=int, default=200_000)
    common.add_argument("--guard-steps", type=int)
    common.add_argument("--max-dim", type=int, default=3)
    common.add_argument("--max-quadruples", type=int)
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./hyperrips-out)")
    common.add_argument("--format", choices=("dot", "faces", "json"))
    common.add_argument("--faces", help="face-list file (homology)")
    common.add_argument("--trace", help="trace file (verify, export)")
    common.add_argument("--unsafe-d", action="store_true", help="allow d < 32*delta+20 (watermarked)")

    p = _Parser(prog="hyperrips", description="Rips complexes of hyperbolic groups")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    handlers = {
        "validate": cmd_validate,
        "ball": _artifact_cmd("ball"),
        "delta": _artifact_cmd("delta"),
        "rips": _artifact_cmd("rips"),
        "homology": cmd_homology,
        "subgroups": cmd_subgroups,
        "classes": cmd_classes,
        "fixed-points": _artifact_cmd("fixed-points"),
        "contract": cmd_contract,
        "verify": cmd_verify,
        "check-rips-theorem": cmd_check_rips_theorem,
    }
    for name, fn in handlers.items():
        sp = sub.add_parser(name, parents=[common])
        sp.set_defaults(func=fn)
    sp = sub.add_parser("export", parents=[common])
    sp.add_argument("artifact", choices=sorted(EXPORTS))
    sp.set_defaults(func=cmd_export)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required")
        return args.func(args)
    except UsageError as e:
        sys.stderr.write(json.dumps({"error": "UsageError", "reason": str(e)}) + "\n")
        sys.stderr.write(parser.format_usage())
        return EXIT_USAGE
    except CertificateFailure as e:
        sys.stderr.write(json.dumps(e.to_dict(), default=_jsonable) + "\n")
        return e.exit_code
    except HyperRipsError as e:
        sys.stderr.write(json.dumps(e.to_dict(), default=_jsonable) + "\n")
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
