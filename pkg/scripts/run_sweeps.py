#!/usr/bin/env python3
"""Reproduce the four parameter sweeps (k, n, S, ell) and write one CSV each.

Desk-scale by default (k multiplied by 0.2); pass --scale 1.0 for the full
reference configuration.  Equivalent to four ``hude bench`` invocations.
"""
import argparse
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from hude.bench import ExperimentConfig, run_sweep, write_results_csv

SWEEPS = {
    "k": (5000, 10000, 20000, 50000),
    "n": (250, 500, 750, 1000),
    "S": (30, 40, 50, 60, 70),
    "ell": (2, 3, 4),
}


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="results", help="directory for the CSVs")
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--scale", type=float, default=0.2,
                        help="multiplies k (1.0 = full reference scale)")
    parser.add_argument("--queries", type=int, default=100)
    args = parser.parse_args()

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for param, values in SWEEPS.items():
        config = ExperimentConfig(
            sweep_param=param,
            sweep_values=values,
            queries_per_point=args.queries,
            seed=args.seed,
            scale=args.scale,
        )
        started = time.time()
        rows = run_sweep(config)
        path = out_dir / f"sweep_{param}.csv"
        write_results_csv(
            rows, path, {"sweep": param, "seed": args.seed, "scale": args.scale}
        )
        print(f"{param}-sweep: {len(rows)} rows -> {path} ({time.time() - started:.1f}s)",
              file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
