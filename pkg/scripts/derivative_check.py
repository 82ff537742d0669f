"""Closed-form d lambda1 / d alpha against Richardson finite differences along alpha."""

import argparse

import numpy as np

from allee_zone.eigen_core import principal_eigenvalue
from allee_zone.model import BoundarySpec, GrowthPair, ZoneLayout
from allee_zone.sensitivity import dlambda_dalpha_closed, dlambda_dalpha_fd

BCS = {"NN": (1, 0, 1, 0), "DD": (0, 1, 0, 1), "ND": (1, 0, 0, 1), "DN": (0, 1, 1, 0)}


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--L", type=float, default=10.0)
    p.add_argument("--r", type=float, default=0.2)
    p.add_argument("--a", type=float, default=0.1)
    p.add_argument("--l", type=float, default=3.0)
    p.add_argument("--points", type=int, default=9)
    args = p.parse_args()

    growth = GrowthPair.cubic(args.r, args.a)
    for code, coeffs in BCS.items():
        bc = BoundarySpec(*map(float, coeffs))
        worst = 0.0
        for alpha in np.linspace(0.0, args.L - args.l, args.points):
            lay = ZoneLayout(args.L, float(alpha), args.l)
            res = principal_eigenvalue(lay, bc, growth)
            closed = dlambda_dalpha_closed(res, lay, bc, growth).dlambda_dalpha
            fd = dlambda_dalpha_fd(lay, bc, growth)
            err = abs(closed - fd) / max(abs(fd), 1e-12)
            worst = max(worst, err)
            print(f"{code} alpha={alpha:5.2f} {res.case_tag.value} closed {closed:+.8e} fd {fd:+.8e}")
        print(f"{code}: max relative difference {worst:.1e}")


if __name__ == "__main__":
    main()
