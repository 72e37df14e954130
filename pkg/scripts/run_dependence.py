#!/usr/bin/env python3
"""Lasso error as design dependence grows (banded-VAR and AR(2) sweeps)."""
import argparse

from tsreg.bench import ExperimentConfig, run_dependence_sweep
from tsreg.results import emit


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--p", type=int, default=200)
    ap.add_argument("--sample-sizes", type=int, nargs="+", default=[200, 400, 800])
    ap.add_argument("--gamma-grid", type=float, nargs="+", default=[0.0, 0.3, 0.6, 0.9])
    ap.add_argument("--alpha-grid", type=float, nargs="+", default=[0.2, 0.4, 0.6, 0.8])
    ap.add_argument("--replicates", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="dependence.csv")
    ap.add_argument("--workers", type=int, default=0)
    args = ap.parse_args()

    cfg = ExperimentConfig(
        experiment="dependence",
        dimensions=[args.p],
        sample_sizes=args.sample_sizes,
        gamma_grid=args.gamma_grid,
        alpha_grid=args.alpha_grid,
        replicates=args.replicates,
        seed=args.seed,
        output=args.out,
        workers=args.workers,
    )
    result = run_dependence_sweep(cfg)
    emit(result, "csv", args.out)
    print(f"wrote {len(result.rows)} rows to {args.out}")


if __name__ == "__main__":
    main()
