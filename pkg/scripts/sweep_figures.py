"""lambda1 over the (alpha, l) plane for a Robin left end with Neumann or Dirichlet right end.

Writes one CSV per boundary pair and prints where lambda1 changes sign.
"""

import argparse
import csv
from pathlib import Path

import numpy as np

from allee_zone.model import BoundarySpec, GrowthPair
from allee_zone.zone_design import sweep

PAIRS = {"robin_neumann": BoundarySpec(1.0, 1.0, 1.0, 0.0),
         "robin_dirichlet": BoundarySpec(1.0, 1.0, 0.0, 1.0)}


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--L", type=float, default=10.0)
    p.add_argument("--r", type=float, default=0.2)
    p.add_argument("--a", type=float, default=0.1)
    p.add_argument("--step", type=float, default=0.25)
    p.add_argument("--out", type=Path, default=Path("sweep_out"))
    args = p.parse_args()

    growth = GrowthPair.cubic(args.r, args.a)
    grid = np.arange(0.0, args.L + 1e-9, args.step)
    args.out.mkdir(parents=True, exist_ok=True)
    for name, bc in PAIRS.items():
        table = sweep(args.L, bc, growth, grid, grid[1:])
        path = args.out / f"{name}.csv"
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["alpha", "l", "lambda1"])
            for a, l, v in table.rows():
                if v is not None:
                    w.writerow([a, l, repr(v)])
        vals = table.values
        i, j = np.unravel_index(np.nanargmin(vals), vals.shape)
        persist = np.argwhere(vals < 0)
        shortest = table.l[persist[:, 0].min()] if len(persist) else float("nan")
        print(f"{name}: min lambda1 {vals[i, j]:+.5f} at alpha={table.alpha[j]:g}, l={table.l[i]:g}; "
              f"shortest persisting zone on the grid l={shortest:g}; wrote {path}")


if __name__ == "__main__":
    main()
