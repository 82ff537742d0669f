"""Time-dependent runs from a small uniform density for zones [1, 4] and [3, 6].

Prints the simulated fate next to the sign of lambda1 for each boundary pair.
"""

import argparse

from allee_zone.eigen_core import principal_eigenvalue
from allee_zone.model import BoundarySpec, GrowthPair, ZoneLayout
from allee_zone.pde_sim import SimConfig, classify_fate, simulate

BCS = {"N": (1.0, 0.0), "D": (0.0, 1.0)}


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--L", type=float, default=10.0)
    p.add_argument("--r", type=float, default=0.2)
    p.add_argument("--a", type=float, default=0.1)
    p.add_argument("--u0", type=float, default=0.01)
    p.add_argument("--dx", type=float, default=0.025)
    p.add_argument("--t-end", type=float, default=2000.0)
    args = p.parse_args()

    growth = GrowthPair.cubic(args.r, args.a)
    cfg = SimConfig(dx=args.dx, t_end=args.t_end, snapshot_every=5.0)
    for left, alpha in (("N", 1.0), ("D", 1.0), ("D", 3.0)):
        for right in ("N", "D"):
            bc = BoundarySpec(*BCS[left], *BCS[right])
            lay = ZoneLayout(args.L, alpha, 3.0)
            lam = principal_eigenvalue(lay, bc, growth).lambda1
            traj = simulate(lay, bc, growth, args.u0, cfg)
            fate = classify_fate(traj, bc, args.a / 2)
            print(f"{left}{right} zone [{alpha:g}, {alpha + 3:g}]: {fate.verdict.value:9s} "
                  f"lambda1 {lam:+.5f}, final max u {traj.snapshots[-1].max():.4f}")


if __name__ == "__main__":
    main()
