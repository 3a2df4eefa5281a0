"""Measured four-point delta of Cayley-graph balls for each backend.

    python scripts/delta_table.py [--max-radius 6]
"""

import argparse

from hyperrips.cayley import build_ball
from hyperrips.groups import free_abelian, free_group, free_product, infinite_dihedral, symmetric_group
from hyperrips.hyperbolicity import Budget, delta_of_ball

BACKENDS = {
    "free rank 2": free_group(2),
    "infinite dihedral": infinite_dihedral(),
    "Z/2 * Z/3": free_product(2, 3),
    "S3": symmetric_group(3),
    "S4": symmetric_group(4),
    "Z^2": free_abelian(2),
}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--max-radius", type=int, default=6)
    ap.add_argument("--max-vertices", type=int, default=400)
    ap.add_argument("--seconds", type=float, default=60.0)
    args = ap.parse_args()
    print(f"{'group':<20}{'radius':>7}{'|B|':>7}{'delta':>8}  exhaustive  witness")
    for name, o in BACKENDS.items():
        for r in range(1, args.max_radius + 1):
            ball = build_ball(o, r)
            if len(ball.vertices) > args.max_vertices:
                break
            rep = delta_of_ball(ball, Budget(max_seconds=args.seconds))
            w = " ".join(rep.witness) if rep.witness else "-"
            print(f"{name:<20}{r:>7}{len(ball.vertices):>7}{str(rep.delta):>8}  {str(rep.exhaustive):<10}  {w}")


if __name__ == "__main__":
    main()
