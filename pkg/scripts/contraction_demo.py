"""Run the certified equivariant contraction on a few instances and summarize the traces.

    python scripts/contraction_demo.py [--seeds 5] [--out traces/]
"""

import argparse
import json
from pathlib import Path

from hyperrips.cayley import Ball
from hyperrips.contraction import ContractionConfig, contract, seeded_instance, trace_to_dict, verify_trace
from hyperrips.equivariant import subgroup_closure, trivial_subgroup
from hyperrips.groups import free_group, infinite_dihedral


def instances():
    D = infinite_dihedral()
    Ha = subgroup_closure(D, [D.element("a")])
    yield "Dinf, H=<a>, x0=e", ContractionConfig.create(Ha, 20, 0, Ball(D, 30)), Ha, {}
    yield "Dinf, H=<a>, x0=b", ContractionConfig.create(Ha, 20, 0, Ball(D, 30), x0=D.element("b")), Ha, {}
    F = free_group(2)
    Hf = trivial_subgroup(F)
    yield "F2, H=1", ContractionConfig.create(Hf, 20, 0, Ball(F, 16)), Hf, {"max_len": 15, "min_len": 10}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--vertices", type=int, default=8)
    ap.add_argument("--out", type=Path)
    args = ap.parse_args()
    for name, cfg, H, kw in instances():
        for seed in range(args.seeds):
            K = seeded_instance(H, cfg, args.vertices, seed, **kw)
            trace = contract(K, cfg)
            data = trace_to_dict(trace)
            res = verify_trace(data)
            Ms = [s.max_distance for s in trace.steps]
            subcases = "".join(s.subcase for s in trace.moves)
            print(f"{name:<20} seed {seed}: |K0|={len(K):>3} moves={len(trace.moves):>3} "
                  f"max-distance {Ms[0]}->{Ms[-1]} subcases={subcases or '-'} verify={res.ok}")
            if args.out:
                args.out.mkdir(parents=True, exist_ok=True)
                tag = name.split(",")[0].lower().replace(" ", "")
                (args.out / f"{tag}-{seed}.json").write_text(json.dumps(data, indent=2) + "\n")


if __name__ == "__main__":
    main()
