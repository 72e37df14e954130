"""Desk-scale benchmark experiments with deterministic replication.

Three experiment families: lasso error scaling against the rescaled sample
size, the five-method VAR estimation comparison across innovation-covariance
families, and lasso error under increasing temporal/cross dependence of the
design.  Replicates fan out over a process pool when ``workers`` exceeds
one; per-replicate seeds make the output independent of scheduling.
"""
from __future__ import annotations

import dataclasses
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .processes import (
    ErrorCovFamily,
    ProcessSpec,
    RegressionScenario,
    RngSeed,
    build_error_cov,
    gen_sparse_transition,
    repeated_ar2_spec,
    simulate,
    simulate_regression,
    triangular_band_var_spec,
)
from .results import ExperimentResult, emit  # noqa: F401  (emit re-exported)
from .solver import LambdaRule, lasso_regression
from .spectral import ArmaSpec, VarPolynomial
from .var import (
    METHOD_L1_LL,
    METHOD_L1_LL_ORACLE,
    METHOD_L1_LS,
    METHOD_OLS,
    METHOD_RIDGE,
    VarDesign,
    auroc,
    build_design,
    coefficient_path,
    estimate_sigma_from_residuals,
    fit_l1_ll,
    fit_l1_ls,
    fit_ols,
    fit_ridge,
    relative_error,
    support_vector,
)

log = logging.getLogger(__name__)

WORKERS_ENV = "TSREG_WORKERS"

EXPERIMENTS = ("scaling", "var-tables", "dependence")


@dataclass
class ExperimentConfig:
    """Field-for-field mirror of the JSON benchmark configuration."""

    experiment: str
    dimensions: list[int] = field(default_factory=lambda: [10])
    sample_sizes: list[int] = field(default_factory=lambda: [200])
    rhos: list[float] = field(default_factory=lambda: [0.5, 0.7, 0.9])
    families: list[str] = field(default_factory=lambda: ["block-i", "block-ii", "toeplitz"])
    replicates: int = 50
    seed: int = 0
    lambda_constant: float = 1.0
    output: str = "results.csv"
    format: str = "csv"
    density: float = 0.08
    snr: float = 2.0
    regression_snr: float = 1.2
    lag: int = 1
    path_points: int = 50
    gamma_grid: list[float] = field(default_factory=lambda: [0.0, 0.3, 0.6, 0.9])
    alpha_grid: list[float] = field(default_factory=lambda: [0.2, 0.4, 0.6, 0.8])
    workers: int = 0

    def __post_init__(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}; choose from {EXPERIMENTS}")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if self.format not in ("csv", "json"):
            raise ValueError("format must be 'csv' or 'json'")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        for key in data:
            if key not in names:
                raise ValueError(f"unknown config field {key!r}")
        if "experiment" not in data:
            raise ValueError("config must name an 'experiment'")
        return cls(**data)

    @classmethod
    def from_json(cls, path: str | Path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def root_seed(self) -> RngSeed:
        return RngSeed(self.seed, self.experiment)


def _worker_count(cfg: ExperimentConfig) -> int:
    if cfg.workers > 0:
        return cfg.workers
    env = os.environ.get(WORKERS_ENV, "")
    if env.strip():
        return max(1, int(env))
    return 1


def _fan_out(cfg: ExperimentConfig, fn, tasks: list) -> list:
    workers = _worker_count(cfg)
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


# ---------------------------------------------------------------------------
# Scaling experiment: lasso error against n / (k log p)
# ---------------------------------------------------------------------------


def scaling_scenario(p: int, snr: float, seed: RngSeed) -> RegressionScenario:
    """Sparse regression on p independent AR(2) predictors with MA(2) noise.

    Predictor components use lag weights (1.2, -0.36) (unit variance); the
    noise subtracts 0.8 of the previous innovation and adds 0.16 of the one
    before.  The coefficient vector has round(sqrt(p)) active entries of
    magnitude 1/sqrt(k), so its population signal scale is one.
    """
    predictor = repeated_ar2_spec(p, 0.6)
    ma = VarPolynomial((np.array([[0.8]]), np.array([[-0.16]])))
    noise = ProcessSpec(ArmaSpec(ar=None, ma=ma, sigma_eps=np.array([[1.0]])))
    k = max(1, round(math.sqrt(p)))
    rng = seed.generator()
    support = rng.choice(p, size=k, replace=False)
    signs = rng.integers(0, 2, size=k) * 2 - 1
    beta = np.zeros(p)
    beta[support] = signs / math.sqrt(k)
    return RegressionScenario(beta_star=beta, predictor_spec=predictor, noise_spec=noise, snr=snr)


@dataclass(frozen=True)
class _ScalingTask:
    p: int
    n: int
    replicate: int
    lambda_constant: float
    snr: float
    seed: RngSeed


_SCALING_SCENARIOS: dict = {}


def _scaling_replicate(task: _ScalingTask) -> list[tuple[str, str, int, str, float]]:
    key = (task.p, task.snr, task.seed.seed)
    scn = _SCALING_SCENARIOS.get(key)
    if scn is None:
        scn = scaling_scenario(task.p, task.snr, RngSeed(task.seed.seed, f"scaling/beta-p{task.p}"))
        _SCALING_SCENARIOS[key] = scn
    x, y = simulate_regression(scn, task.n, task.seed)
    lam = LambdaRule(constant=task.lambda_constant, n=task.n, p_eff=task.p).value
    fit = lasso_regression(x, y, lam)
    err = float(np.linalg.norm(fit.beta_hat - scn.beta_star))
    k = max(1, round(math.sqrt(task.p)))
    setting = f"p={task.p},n={task.n}"
    rescaled = task.n / (k * math.log(task.p))
    return [
        ("scaling", setting, "lasso", task.replicate, "l2_error", err),
        ("scaling", setting, "lasso", task.replicate, "n_rescaled", rescaled),
    ]


def run_scaling_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    root = cfg.root_seed()
    tasks = [
        _ScalingTask(
            p=p,
            n=n,
            replicate=r,
            lambda_constant=cfg.lambda_constant,
            snr=cfg.regression_snr,
            seed=root.child(f"p{p}/n{n}/rep{r}"),
        )
        for p in cfg.dimensions
        for n in cfg.sample_sizes
        for r in range(cfg.replicates)
    ]
    result = ExperimentResult()
    for rows in _fan_out(cfg, _scaling_replicate, tasks):
        for row in rows:
            result.add(*row)
    return result


# ---------------------------------------------------------------------------
# VAR benchmark: five estimators across covariance families
# ---------------------------------------------------------------------------


def choose_ridge_lambda(design: VarDesign) -> float:
    """Five-point grid scored by forecast error on the held-out 20% tail."""
    n = design.n_samples
    n_tail = max(1, round(0.2 * n))
    n_train = n - n_tail
    if n_train < 1:
        raise ValueError("not enough rows to hold out a tail block")
    head = VarDesign(
        response=design.response[:n_train],
        predictors=design.predictors[:n_train],
        d=design.d,
    )
    scale = float(np.mean(np.diagonal(head.predictors.T @ head.predictors / n_train)))
    grid = scale * np.logspace(-3.0, 1.0, 5)
    best_lam, best_score = None, math.inf
    x_tail = design.predictors[n_train:]
    y_tail = design.response[n_train:]
    for lam in grid:
        est = fit_ridge(head, float(lam))
        b = np.concatenate([c.T for c in est.coeffs.coeffs], axis=0)
        score = float(np.sum((y_tail - x_tail @ b) ** 2))
        if score < best_score:
            best_score = score
            best_lam = float(lam)
    return best_lam


@dataclass(frozen=True)
class _VarTask:
    p: int
    T: int
    family: str
    rho: float
    replicate: int
    density: float
    snr: float
    lambda_constant: float
    path_points: int
    lag: int
    seed: RngSeed


def _var_replicate(task: _VarTask) -> list[tuple[str, str, int, str, float]]:
    setting = f"p={task.p},T={task.T},family={task.family},rho={task.rho}"
    fam = ErrorCovFamily(family=task.family, rho=task.rho, p=task.p)
    sigma = build_error_cov(fam)
    truth = gen_sparse_transition(
        task.p, task.density, task.snr, task.seed.child("transition"), sigma_eps=sigma
    )
    spec = ProcessSpec(ArmaSpec(ar=truth, ma=None, sigma_eps=sigma))
    data = simulate(spec, task.T + 1, task.seed.child("path"))
    design = build_design(data, task.lag)
    lam = LambdaRule(
        constant=task.lambda_constant, n=design.n_samples, p_eff=task.lag * task.p**2
    ).value
    truth_support = support_vector(truth)
    rows: list[tuple[str, str, int, str, float]] = []

    def add(method: str, metric: str, value: float) -> None:
        rows.append(("var-tables", setting, method, task.replicate, metric, value))

    try:
        add(METHOD_OLS, "relative_error", relative_error(fit_ols(design), truth))
    except ValueError as exc:
        log.warning("OLS failed at %s replicate %d: %s", setting, task.replicate, exc)

    ridge_lam = choose_ridge_lambda(design)
    add(METHOD_RIDGE, "relative_error", relative_error(fit_ridge(design, ridge_lam), truth))

    ls = fit_l1_ls(design, lam)
    add(METHOD_L1_LS, "relative_error", relative_error(ls, truth))
    ls_path = coefficient_path(design, points=task.path_points)
    add(METHOD_L1_LS, "auroc", auroc(ls_path, truth_support))

    sigma_hat = estimate_sigma_from_residuals(design, ls)
    ll = fit_l1_ll(design, lam, sigma_hat, method=METHOD_L1_LL)
    add(METHOD_L1_LL, "relative_error", relative_error(ll, truth))
    ll_path = coefficient_path(design, sigma_eps=sigma_hat, points=task.path_points)
    add(METHOD_L1_LL, "auroc", auroc(ll_path, truth_support))

    llo = fit_l1_ll(design, lam, sigma, method=METHOD_L1_LL_ORACLE)
    add(METHOD_L1_LL_ORACLE, "relative_error", relative_error(llo, truth))
    llo_path = coefficient_path(design, sigma_eps=sigma, points=task.path_points)
    add(METHOD_L1_LL_ORACLE, "auroc", auroc(llo_path, truth_support))
    return rows


def run_var_benchmark(cfg: ExperimentConfig) -> ExperimentResult:
    root = cfg.root_seed()
    tasks = []
    for p in cfg.dimensions:
        for T in cfg.sample_sizes:
            for family in cfg.families:
                for rho in cfg.rhos:
                    for r in range(cfg.replicates):
                        tasks.append(
                            _VarTask(
                                p=p,
                                T=T,
                                family=family,
                                rho=rho,
                                replicate=r,
                                density=cfg.density,
                                snr=cfg.snr,
                                lambda_constant=cfg.lambda_constant,
                                path_points=cfg.path_points,
                                lag=cfg.lag,
                                seed=root.child(f"p{p}/T{T}/{family}/rho{rho}/rep{r}"),
                            )
                        )
    result = ExperimentResult()
    failures = 0
    for rows in _fan_out(cfg, _var_replicate_safe, tasks):
        if rows is None:
            failures += 1
            continue
        for row in rows:
            result.add(*row)
    if failures:
        log.warning("%d replicate(s) failed and were skipped", failures)
    return result


def _var_replicate_safe(task: _VarTask):
    try:
        return _var_replicate(task)
    except Exception as exc:  # pragma: no cover - defensive logging path
        log.warning("replicate %s failed: %s", task, exc)
        return None


# ---------------------------------------------------------------------------
# Dependence sweep: lasso error under growing design dependence
# ---------------------------------------------------------------------------


def dependence_scenario(kind: str, p: int, level: float, snr: float, seed: RngSeed) -> RegressionScenario:
    """Regression design with tunable dependence.

    ``triangular``: VAR(1) predictors with banded upper-triangular transition
    (cross-sectional + temporal dependence grows with ``level``), i.i.d.
    noise.  ``ar2``: independent AR(2) predictors whose memory grows with
    ``level``, i.i.d. noise.
    """
    if kind == "triangular":
        predictor = triangular_band_var_spec(p, alpha=0.2, gamma=level)
    elif kind == "ar2":
        predictor = repeated_ar2_spec(p, level)
    else:
        raise ValueError(f"unknown dependence kind {kind!r}")
    noise = ProcessSpec(ArmaSpec(ar=None, ma=None, sigma_eps=np.array([[1.0]])))
    k = max(1, round(math.sqrt(p)))
    rng = seed.generator()
    support = rng.choice(p, size=k, replace=False)
    signs = rng.integers(0, 2, size=k) * 2 - 1
    beta = np.zeros(p)
    beta[support] = signs / math.sqrt(k)
    return RegressionScenario(beta_star=beta, predictor_spec=predictor, noise_spec=noise, snr=snr)


@dataclass(frozen=True)
class _DependenceTask:
    kind: str
    p: int
    level: float
    n: int
    replicate: int
    lambda_constant: float
    snr: float
    seed: RngSeed


def _dependence_replicate(task: _DependenceTask) -> list[tuple[str, str, int, str, float]]:
    scn = dependence_scenario(
        task.kind, task.p, task.level, task.snr, RngSeed(task.seed.seed, f"dependence/beta-{task.kind}-p{task.p}")
    )
    x, y = simulate_regression(scn, task.n, task.seed)
    lam = LambdaRule(constant=task.lambda_constant, n=task.n, p_eff=task.p).value
    fit = lasso_regression(x, y, lam)
    err = float(np.linalg.norm(fit.beta_hat - scn.beta_star))
    setting = f"kind={task.kind},p={task.p},level={task.level},n={task.n}"
    return [("dependence", setting, "lasso", task.replicate, "l2_error", err)]


def run_dependence_sweep(cfg: ExperimentConfig) -> ExperimentResult:
    root = cfg.root_seed()
    tasks = []
    p = cfg.dimensions[0]
    for kind, grid in (("triangular", cfg.gamma_grid), ("ar2", cfg.alpha_grid)):
        for level in grid:
            for n in cfg.sample_sizes:
                for r in range(cfg.replicates):
                    tasks.append(
                        _DependenceTask(
                            kind=kind,
                            p=p,
                            level=float(level),
                            n=n,
                            replicate=r,
                            lambda_constant=cfg.lambda_constant,
                            snr=cfg.regression_snr,
                            seed=root.child(f"{kind}/level{level}/n{n}/rep{r}"),
                        )
                    )
    result = ExperimentResult()
    for rows in _fan_out(cfg, _dependence_replicate, tasks):
        for row in rows:
            result.add(*row)
    return result


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    if cfg.experiment == "scaling":
        return run_scaling_experiment(cfg)
    if cfg.experiment == "var-tables":
        return run_var_benchmark(cfg)
    return run_dependence_sweep(cfg)
