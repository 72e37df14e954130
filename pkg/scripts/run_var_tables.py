#!/usr/bin/env python3
"""Five-method VAR benchmark across innovation-covariance families.

Defaults cover the small setting (p=10, T=30); use --dimensions 30
--sample-sizes 120 for the medium setting.  Raw per-replicate rows are
emitted; aggregate with pandas or tsreg.results.read_csv.
"""
import argparse

from tsreg.bench import ExperimentConfig, run_var_benchmark
from tsreg.results import emit


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dimensions", type=int, nargs="+", default=[10])
    ap.add_argument("--sample-sizes", type=int, nargs="+", default=[30])
    ap.add_argument("--rhos", type=float, nargs="+", default=[0.5, 0.7, 0.9])
    ap.add_argument("--families", nargs="+", default=["block-i", "block-ii", "toeplitz"])
    ap.add_argument("--replicates", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="var_tables.csv")
    ap.add_argument("--workers", type=int, default=0)
    args = ap.parse_args()

    cfg = ExperimentConfig(
        experiment="var-tables",
        dimensions=args.dimensions,
        sample_sizes=args.sample_sizes,
        rhos=args.rhos,
        families=args.families,
        replicates=args.replicates,
        seed=args.seed,
        output=args.out,
        workers=args.workers,
    )
    result = run_var_benchmark(cfg)
    emit(result, "csv", args.out)
    print(f"wrote {len(result.rows)} rows to {args.out}")


if __name__ == "__main__":
    main()
