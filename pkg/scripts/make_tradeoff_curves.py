#!/usr/bin/env python3
"""Emit the sample-ratio / query-exponent trade-off curves at rho_u = 1/2.

Writes one CSV with the numeric lower-bound curve, the closed-form lower
bound, and both upper-bound forms on a geometric sample-ratio grid.
Equivalent to ``hude tradeoff --rho-u 0.5 --s-grid 20:10000:log25``.
"""
import argparse
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from hude.tradeoff import tradeoff_rows, write_tradeoff_csv


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results/tradeoff.csv")
    parser.add_argument("--rho-u", type=float, default=0.5)
    parser.add_argument("--eps", type=float, default=1.0)
    parser.add_argument("--points", type=int, default=25)
    parser.add_argument("--s-min", type=float, default=20.0)
    parser.add_argument("--s-max", type=float, default=10_000.0)
    args = parser.parse_args()

    grid = np.geomspace(args.s_min, args.s_max, args.points)
    started = time.time()
    rows = tradeoff_rows(args.rho_u, grid, epsilon=args.eps)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_tradeoff_csv(rows, out, {"rho_u": args.rho_u, "epsilon": args.eps})
    print(f"{len(rows)} curve points -> {out} ({time.time() - started:.1f}s)",
          file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
