"""Critical zone lengths: closed-form bounds against the bisection root of lambda1 at the best alpha."""

import argparse
import json

from allee_zone.model import BoundarySpec, GrowthPair
from allee_zone.zone_design import critical_lengths

BCS = {"NN": (1, 0, 1, 0), "DD": (0, 1, 0, 1), "ND": (1, 0, 0, 1), "DN": (0, 1, 1, 0)}


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--L", type=float, default=10.0)
    p.add_argument("--r", type=float, default=0.2)
    p.add_argument("--a", type=float, default=0.1)
    args = p.parse_args()

    growth = GrowthPair.cubic(args.r, args.a)
    for code, coeffs in BCS.items():
        out = critical_lengths(BoundarySpec(*map(float, coeffs)), growth, args.L)
        print(code, json.dumps({k: round(v, 6) for k, v in out.items()}))


if __name__ == "__main__":
    main()
