"""Transfer-matrix lambda1 against the finite-difference oracle on a grid of layouts."""

import argparse
import itertools

from allee_zone.eigen_core import principal_eigenvalue
from allee_zone.fd_oracle import oracle_eigenvalue
from allee_zone.model import BoundarySpec, GrowthPair, ZoneLayout

BCS = {"NN": (1, 0, 1, 0), "DD": (0, 1, 0, 1), "ND": (1, 0, 0, 1), "DN": (0, 1, 1, 0)}


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--L", type=float, default=10.0)
    p.add_argument("--r", type=float, default=0.2)
    p.add_argument("--a", type=float, default=0.1)
    args = p.parse_args()

    growth = GrowthPair.cubic(args.r, args.a)
    layouts = [(0.0, 3.0), (1.0, 4.0), (3.0, 4.0), (6.0, 4.0), (2.5, 0.5), (0.0, 10.0)]
    worst = 0.0
    print(f"{'bc':3s} {'alpha':>6s} {'l':>5s} {'transfer':>16s} {'oracle':>16s} {'diff':>9s}")
    for code, (alpha, l) in itertools.product(BCS, layouts):
        bc = BoundarySpec(*map(float, BCS[code]))
        lay = ZoneLayout(args.L, alpha, l)
        lam = principal_eigenvalue(lay, bc, growth).lambda1
        ref, _ = oracle_eigenvalue(lay, bc, growth)
        worst = max(worst, abs(lam - ref))
        print(f"{code:3s} {alpha:6.2f} {l:5.2f} {lam:+16.10f} {ref:+16.10f} {abs(lam - ref):9.1e}")
    print(f"max difference {worst:.2e}")


if __name__ == "__main__":
    main()
