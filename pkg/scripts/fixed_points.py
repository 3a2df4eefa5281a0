"""Fixed-point complexes of finite subgroups: connectivity, homology, collapsibility.

    python scripts/fixed_points.py [--d 20] [--radius 30]
"""

import argparse

from hyperrips.cayley import Ball
from hyperrips.complex import greedy_collapse, reduced_homology
from hyperrips.equivariant import (conjugacy_classes, enumerate_finite_subgroups, fixed_point_complex,
                                   invariant_simplex_poset)
from hyperrips.groups import free_product, infinite_dihedral


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--d", type=int, default=20)
    ap.add_argument("--radius", type=int, default=30)
    args = ap.parse_args()
    for name, o in [("Dinf", infinite_dihedral()), ("Z/2 * Z/3", free_product(2, 3))]:
        subs = enumerate_finite_subgroups(o, 0)
        radius = args.radius if name == "Dinf" else min(args.radius, 10)
        ball = Ball(o, radius)
        for c in conjugacy_classes(subs, o, 4):
            H = c.representative
            if H.order == 1:
                continue
            d = args.d if name == "Dinf" else min(args.d, 6)
            poset = invariant_simplex_poset(H, ball, d)
            ec = fixed_point_complex(poset)
            hom = reduced_homology(ec)
            print(f"{name:<10} H={H.words()} d={d} R={radius}: orbits={len(poset.orbits)} "
                  f"f={ec.f_vector()} connected={ec.is_connected()} "
                  f"acyclic={hom.is_trivial()} collapsible={greedy_collapse(ec)[1]}")


if __name__ == "__main__":
    main()
