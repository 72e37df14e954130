"""Command-line front end: simulate, spectra, fit, diagnose, bench.

Exit codes: 0 on success, 1 on usage errors (bad flags, malformed specs or
configs), 2 on runtime failures (e.g. a singular design passed to OLS).
Outputs are deterministic: the same argv against the same input files
produces byte-identical files.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .bench import ExperimentConfig, run_experiment
from .diagnostics import (
    certify_re,
    gram_deviation_mc,
    rate_audit,
    toeplitz_sandwich_check,
)
from .processes import (
    ProcessSpec,
    RngSeed,
    read_dataset,
    simulate,
    spec_from_dict,
    write_dataset,
)
from .results import emit
from .solver import LambdaRule
from .spectral import stability_measures, spectrum_rows
from .var import (
    METHOD_L1_LL,
    METHOD_L1_LL_ORACLE,
    METHOD_L1_LS,
    METHOD_OLS,
    METHOD_RIDGE,
    build_design,
    fit_l1_ll,
    fit_l1_ll_plugin,
    fit_l1_ls,
    fit_ols,
    fit_ridge,
)

METHODS = (METHOD_L1_LS, METHOD_L1_LL, METHOD_L1_LL_ORACLE, METHOD_OLS, METHOD_RIDGE)
CHECKS = ("re", "deviation", "sandwich", "rate")


class InputError(ValueError):
    """Malformed input file or inconsistent flags; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _load_json(path: str) -> object:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise InputError(f"no such file: {path}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc


def _load_spec(path: str) -> ProcessSpec:
    data = _load_json(path)
    if not isinstance(data, dict):
        raise InputError(f"{path}: process spec must be a JSON object")
    try:
        return spec_from_dict(data)
    except (KeyError, ValueError, TypeError) as exc:
        raise InputError(f"{path}: bad process spec: {exc}") from exc


def _load_matrix(path: str) -> np.ndarray:
    data = _load_json(path)
    if isinstance(data, dict):
        for key in ("sigma", "matrix"):
            if key in data:
                data = data[key]
                break
        else:
            raise InputError(f"{path}: expected a 'sigma' or 'matrix' field")
    try:
        m = np.asarray(data, dtype=float)
    except (ValueError, TypeError) as exc:
        raise InputError(f"{path}: not a numeric matrix: {exc}") from exc
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InputError(f"{path}: matrix must be square, got shape {m.shape}")
    return m


def _load_data(path: str) -> np.ndarray:
    try:
        return read_dataset(path)
    except FileNotFoundError as exc:
        raise InputError(f"no such file: {path}") from exc
    except ValueError as exc:
        raise InputError(f"{path}: could not parse series CSV: {exc}") from exc


def _write_json(path: str, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# Sub-command handlers
# ---------------------------------------------------------------------------


def _cmd_simulate(args: argparse.Namespace) -> int:
    spec = _load_spec(args.spec)
    seed = RngSeed(args.seed, "cli/simulate")
    data = simulate(spec, args.T, seed)
    write_dataset(args.out, data, spec, seed)
    return 0


def _cmd_spectra(args: argparse.Namespace) -> int:
    spec = _load_spec(args.spec)
    report = stability_measures(spec.arma, args.grid)
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["theta", "eig_index", "value"])
        for theta, idx, value in spectrum_rows(spec.arma, args.grid):
            writer.writerow([repr(theta), idx, repr(value)])
    _write_json(args.out + ".json", report.to_dict())
    return 0


def _resolve_lambda(args: argparse.Namespace, n: int, p_eff: int) -> float | None:
    if args.lam is not None:
        return args.lam
    if args.lambda_rule is not None:
        return LambdaRule(constant=args.lambda_rule, n=n, p_eff=p_eff).value
    return None


def _cmd_fit(args: argparse.Namespace) -> int:
    data = _load_data(args.data)
    if data.shape[0] <= args.d:
        raise InputError(f"{args.data}: need more than d={args.d} rows, got {data.shape[0]}")
    design = build_design(data, args.d)
    p_eff = args.d * design.p ** 2
    lam = _resolve_lambda(args, design.n_samples, p_eff)
    sigma = _load_matrix(args.sigma) if args.sigma else None

    if args.method in (METHOD_L1_LS, METHOD_L1_LL, METHOD_L1_LL_ORACLE, METHOD_RIDGE) and lam is None:
        raise InputError(f"method {args.method} needs --lambda or --lambda-rule")
    if args.method == METHOD_L1_LS:
        est = fit_l1_ls(design, lam)
    elif args.method == METHOD_L1_LL_ORACLE:
        if sigma is None:
            raise InputError("method l1ll-oracle requires --sigma")
        est = fit_l1_ll(design, lam, sigma, method=METHOD_L1_LL_ORACLE)
    elif args.method == METHOD_L1_LL:
        if sigma is not None:
            est = fit_l1_ll(design, lam, sigma, method=METHOD_L1_LL)
        else:
            est = fit_l1_ll_plugin(design, lam)
    elif args.method == METHOD_OLS:
        est = fit_ols(design)
    else:
        est = fit_ridge(design, lam)
    _write_json(args.out, est.to_dict())
    return 0


def _sparse_direction(p: int, k: int, seed: RngSeed) -> np.ndarray:
    rng = seed.generator()
    if not (1 <= k <= p):
        raise InputError(f"--k must lie in [1, {p}], got {k}")
    support = rng.choice(p, size=k, replace=False)
    v = np.zeros(p)
    v[support] = rng.standard_normal(k)
    return v / np.linalg.norm(v)


def _cmd_diagnose(args: argparse.Namespace) -> int:
    if args.check == "re":
        data = _load_data(args.data)
        gram = data.T @ data / data.shape[0]
        cert = certify_re(
            gram,
            alpha=args.alpha,
            tau=args.tau,
            trials=args.trials,
            k=args.k,
            seed=RngSeed(args.seed, "cli/diagnose/re"),
        )
        _write_json(args.out, cert.to_dict())
        return 0

    spec = _load_spec(args.spec)
    if args.check == "deviation":
        seed = RngSeed(args.seed, "cli/diagnose/deviation")
        if args.direction:
            v = np.loadtxt(args.direction, delimiter=",", ndmin=1)
        else:
            v = _sparse_direction(spec.p, args.k, seed.child("direction"))
        report = gram_deviation_mc(spec, args.n, v, args.eta, args.replicates, seed)
        _write_json(args.out, report.to_dict())
        return 0
    if args.check == "sandwich":
        report = toeplitz_sandwich_check(spec, args.n, grid_size=args.grid, slack=args.slack)
        _write_json(args.out, report.to_dict())
        return 0
    # rate audit
    if spec.arma.ar is None or spec.arma.ma is not None:
        raise InputError("--check rate requires a pure VAR spec (ar only)")
    try:
        ns = [int(tok) for tok in args.ns.split(",") if tok.strip()]
    except ValueError as exc:
        raise InputError(f"--ns must be a comma-separated integer list: {args.ns!r}") from exc
    if not ns:
        raise InputError("--ns must name at least one sample size")
    report = rate_audit(
        spec.arma.ar,
        spec.arma.sigma_eps,
        ns,
        args.replicates,
        RngSeed(args.seed, "cli/diagnose/rate"),
        lambda_constant=args.lambda_rule,
    )
    _write_json(args.out, report.to_dict())
    return 0


def _cmd_bench(args: argparse.Namespace) -> int:
    data = _load_json(args.config)
    if not isinstance(data, dict):
        raise InputError(f"{args.config}: config must be a JSON object")
    try:
        cfg = ExperimentConfig.from_dict(data)
    except (ValueError, TypeError) as exc:
        raise InputError(f"{args.config}: {exc}") from exc
    result = run_experiment(cfg)
    emit(result, cfg.format, cfg.output)
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tsreg", description=__doc__)
    sub = parser.add_subparsers(dest="verb", required=True)

    sim = sub.add_parser("simulate", help="draw a stationary sample path and write CSV + JSON sidecar")
    sim.add_argument("--spec", required=True, help="process spec JSON file")
    sim.add_argument("--T", type=int, required=True, help="number of output rows")
    sim.add_argument("--seed", type=int, default=0, help="integer seed (default 0)")
    sim.add_argument("--out", required=True, help="output CSV path")

    spe = sub.add_parser("spectra", help="spectral-density eigenvalue curves + stability report")
    spe.add_argument("--spec", required=True, help="process spec JSON file")
    spe.add_argument("--grid", type=int, default=2048, help="frequency grid size (default 2048)")
    spe.add_argument("--out", required=True, help="spectrum CSV path; report lands at <out>.json")

    fit = sub.add_parser("fit", help="estimate a VAR transition from a series CSV")
    fit.add_argument("--data", required=True, help="series CSV (rows = time)")
    fit.add_argument("--method", required=True, choices=METHODS)
    fit.add_argument("--d", type=int, default=1, help="lag order (default 1)")
    fit.add_argument("--lambda", dest="lam", type=float, default=None, help="penalty level")
    fit.add_argument(
        "--lambda-rule",
        type=float,
        default=None,
        help="penalty constant c for c*sqrt(log(d p^2)/n) (alternative to --lambda)",
    )
    fit.add_argument("--sigma", default=None, help="innovation covariance JSON (l1ll optional, l1ll-oracle required)")
    fit.add_argument("--out", required=True, help="estimate JSON path")

    dia = sub.add_parser("diagnose", help="randomized and exact spectral diagnostics")
    dia.add_argument("--check", required=True, choices=CHECKS)
    dia.add_argument("--spec", help="process spec JSON (deviation, sandwich, rate)")
    dia.add_argument("--data", help="design CSV (re check)")
    dia.add_argument("--n", type=int, default=200, help="sample size per replicate")
    dia.add_argument("--ns", default="100,400,1600", help="comma list of sample sizes (rate check)")
    dia.add_argument("--replicates", type=int, default=200)
    dia.add_argument("--eta", type=float, default=0.1, help="deviation-bound level")
    dia.add_argument("--alpha", type=float, default=0.1, help="curvature target (re check)")
    dia.add_argument("--tau", type=float, default=0.0, help="tolerance slope (re check)")
    dia.add_argument("--trials", type=int, default=2000, help="sampled directions (re check)")
    dia.add_argument("--k", type=int, default=2, help="direction sparsity")
    dia.add_argument("--grid", type=int, default=8192, help="frequency grid (sandwich check)")
    dia.add_argument("--slack", type=float, default=1e-4, help="grid slack (sandwich check)")
    dia.add_argument("--direction", default=None, help="CSV vector overriding the random direction")
    dia.add_argument("--lambda-rule", type=float, default=1.0, help="penalty constant (rate check)")
    dia.add_argument("--seed", type=int, default=0)
    dia.add_argument("--out", required=True, help="report JSON path")

    ben = sub.add_parser("bench", help="run a benchmark experiment from a JSON config")
    ben.add_argument("--config", required=True, help="ExperimentConfig JSON file")

    return parser


_HANDLERS = {
    "simulate": _cmd_simulate,
    "spectra": _cmd_spectra,
    "fit": _cmd_fit,
    "diagnose": _cmd_diagnose,
    "bench": _cmd_bench,
}


def _require(args: argparse.Namespace, parser: argparse.ArgumentParser) -> None:
    if args.verb == "diagnose":
        if args.check == "re" and not args.data:
            raise InputError("--check re requires --data")
        if args.check != "re" and not args.spec:
            raise InputError(f"--check {args.check} requires --spec")


def parse_and_dispatch(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _require(args, parser)
        return _HANDLERS[args.verb](args)
    except InputError as exc:
        sys.stderr.write(f"tsreg: error: {exc}\n")
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        sys.stderr.write(f"tsreg: runtime error: {exc}\n")
        return 2


def main(argv: list[str] | None = None) -> int:
    return parse_and_dispatch(argv)


if __name__ == "__main__":
    raise SystemExit(main())
