#!/usr/bin/env python3
"""Lasso error-scaling experiment: curves collapse on the n/(k log p) axis.

Desk-scale defaults finish in a few minutes; pass --replicates 50 and more
sample sizes for smoother curves.
"""
import argparse
import math

from tsreg.bench import ExperimentConfig, run_scaling_experiment
from tsreg.results import emit


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dimensions", type=int, nargs="+", default=[64, 128, 256])
    ap.add_argument("--abscissae", type=float, nargs="+", default=[5.0, 10.0, 20.0],
                    help="target values of n/(k log p); sample sizes are derived per p")
    ap.add_argument("--replicates", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="scaling.csv")
    ap.add_argument("--workers", type=int, default=0)
    args = ap.parse_args()

    for p in args.dimensions:
        k = max(1, round(math.sqrt(p)))
        ns = sorted({max(20, round(x * k * math.log(p))) for x in args.abscissae})
        cfg = ExperimentConfig(
            experiment="scaling",
            dimensions=[p],
            sample_sizes=ns,
            replicates=args.replicates,
            seed=args.seed,
            output=args.out,
            workers=args.workers,
        )
        result = run_scaling_experiment(cfg)
        out = args.out.replace(".csv", f"_p{p}.csv")
        emit(result, "csv", out)
        print(f"p={p}: wrote {len(result.rows)} rows to {out}")


if __name__ == "__main__":
    main()
