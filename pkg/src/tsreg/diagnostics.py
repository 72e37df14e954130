"""Monte-Carlo certification of the concentration and curvature claims.

These checks quantify, on simulated data, the quantities the estimation
theory runs on: restricted-eigenvalue curvature of a Gram matrix, deviations
of sample covariances from their targets, eigenvalue sandwiches for stacked
covariances, and the scaling of penalized-estimation errors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .processes import ProcessSpec, RngSeed, simulate
from .results import ExperimentResult
from .solver import LambdaRule
from .spectral import (
    ArmaSpec,
    VarPolynomial,
    block_toeplitz_cov,
    companion_matrix,
    arma_autocovariance,
    mu_extremes,
    stability_measures,
    subprocess_stability,
    var_autocovariance,
)
from .var import build_design, fit_l1_ls, relative_error, support_vector

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# Restricted-eigenvalue certification
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ReCertificate:
    """Sampled lower bound on restricted curvature."""

    alpha: float
    tau: float
    violated: bool
    worst_direction: np.ndarray
    trials: int

    def to_dict(self) -> dict:
        return {
            "alpha": float(self.alpha),
            "tau": float(self.tau),
            "violated": bool(self.violated),
            "worst_direction": np.asarray(self.worst_direction).tolist(),
            "trials": int(self.trials),
        }


def certify_re(
    gram: np.ndarray,
    alpha: float,
    tau: float,
    trials: int,
    k: int,
    seed: RngSeed,
) -> ReCertificate:
    """Sample directions and report the minimum of ``v'Gv + tau ||v||_1^2``.

    Half the draws are exactly k-sparse unit vectors; the other half are unit
    vectors whose off-support l1 mass is clipped to three times the on-support
    mass, probing the cone where the curvature condition must hold.
    """
    g = np.asarray(gram, dtype=float)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise ValueError("gram must be square")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    q = g.shape[0]
    k = min(max(k, 1), q)
    rng = seed.generator()
    best = math.inf
    worst = np.zeros(q)
    for t in range(trials):
        support = rng.choice(q, size=k, replace=False)
        if t % 2 == 0:
            v = np.zeros(q)
            v[support] = rng.standard_normal(k)
        else:
            v = rng.standard_normal(q)
            on = float(np.sum(np.abs(v[support])))
            mask = np.ones(q, dtype=bool)
            mask[support] = False
            off = float(np.sum(np.abs(v[mask])))
            if off > 3.0 * on and off > 0.0:
                v[mask] *= 3.0 * on / off
        norm = float(np.linalg.norm(v))
        if norm == 0.0:
            continue
        v /= norm
        stat = float(v @ g @ v) + tau * float(np.sum(np.abs(v))) ** 2
        if stat < best:
            best = stat
            worst = v.copy()
    cushion = 1e-12 * max(1.0, abs(alpha))  # pure round-off is not a violation
    return ReCertificate(
        alpha=best, tau=tau, violated=best < alpha - cushion, worst_direction=worst, trials=trials
    )


# ---------------------------------------------------------------------------
# Covariance deviation Monte Carlo
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DeviationSample:
    statistic: float
    bound: float
    exceeded: bool


@dataclass(frozen=True, eq=False)
class GramDeviationReport:
    """Exceedance of ``|v'(S - Gamma(0))v|`` against its stability bound."""

    n: int
    eta: float
    bound: float
    frequency: float
    statistics: np.ndarray

    def samples(self) -> list[DeviationSample]:
        return [DeviationSample(float(s), self.bound, bool(s > self.bound)) for s in self.statistics]

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "eta": self.eta,
            "bound": self.bound,
            "frequency": self.frequency,
            "statistics": [float(s) for s in self.statistics],
        }

    def as_rows(self) -> ExperimentResult:
        out = ExperimentResult()
        for r, s in enumerate(self.statistics):
            out.add("deviation", f"n={self.n},eta={self.eta}", "quadratic-form", r, "statistic", float(s))
            out.add("deviation", f"n={self.n},eta={self.eta}", "quadratic-form", r, "exceeded", float(s > self.bound))
        return out


def gram_deviation_mc(
    spec: ProcessSpec,
    n: int,
    v: np.ndarray,
    eta: float,
    replicates: int,
    seed: RngSeed,
) -> GramDeviationReport:
    """Monte-Carlo exceedance of the quadratic-form deviation bound.

    The bound is ``2 pi M(f, k) eta`` where k is the sparsity of v and S is
    the uncentered second-moment matrix of n consecutive samples.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if eta <= 0:
        raise ValueError("eta must be positive")
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    v = np.asarray(v, dtype=float).ravel()
    if v.size != spec.p:
        raise ValueError("v must have length p")
    k = int(np.count_nonzero(v))
    if k == 0:
        raise ValueError("v must be nonzero")
    v = v / float(np.linalg.norm(v))
    m_k = subprocess_stability(spec.arma, k).value
    bound = TWO_PI * m_k * eta
    gamma0 = _process_autocov(spec, 0)[0]
    target = float(v @ gamma0 @ v)
    stats = np.empty(replicates)
    for r in range(replicates):
        x = simulate(spec, n, seed.child(f"rep{r}"))
        proj = x @ v
        stats[r] = abs(float(proj @ proj) / n - target)
    freq = float(np.mean(stats > bound))
    return GramDeviationReport(n=n, eta=eta, bound=bound, frequency=freq, statistics=stats)


@dataclass(frozen=True, eq=False)
class CrossDeviationReport:
    """Scaling of ``||X'E/n||_inf`` against its dependence-aware rate."""

    n: int
    percentile95: float
    rate: float
    ratio: float
    statistics: np.ndarray

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "percentile95": self.percentile95,
            "rate": self.rate,
            "ratio": self.ratio,
            "statistics": [float(s) for s in self.statistics],
        }


def cross_deviation_mc(
    x_spec: ProcessSpec,
    noise_spec: ProcessSpec,
    n: int,
    replicates: int,
    seed: RngSeed,
) -> CrossDeviationReport:
    """Max cross-moment between an observed design and an independent noise.

    The reference rate is ``(M(f_X, 1) + M(f_E)) * sqrt(log p / n)``.
    """
    p = x_spec.p
    if noise_spec.p != 1:
        raise ValueError("noise process must be univariate")
    if n < math.log(max(p, 2)):
        raise ValueError("n must be at least log p")
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    m_x = subprocess_stability(x_spec.arma, 1).value
    m_e = stability_measures(noise_spec.arma).m_upper
    rate = (m_x + m_e) * math.sqrt(math.log(p) / n)
    stats = np.empty(replicates)
    for r in range(replicates):
        x = simulate(x_spec, n, seed.child(f"x{r}"))
        e = simulate(noise_spec, n, seed.child(f"e{r}"))[:, 0]
        stats[r] = float(np.max(np.abs(x.T @ e))) / n
    pct = float(np.quantile(stats, 0.95))
    return CrossDeviationReport(n=n, percentile95=pct, rate=rate, ratio=pct / rate, statistics=stats)


# ---------------------------------------------------------------------------
# Stacked-covariance eigenvalue sandwich
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SandwichReport:
    """Eigenvalues of the stacked covariance against 2*pi density extrema."""

    n: int
    eig_min: float
    eig_max: float
    lower: float
    upper: float
    slack: float
    passed: bool
    violation: float

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "eig_min": self.eig_min,
            "eig_max": self.eig_max,
            "lower": self.lower,
            "upper": self.upper,
            "slack": self.slack,
            "passed": self.passed,
            "violation": self.violation,
        }


def _process_autocov(spec: ProcessSpec, max_lag: int) -> list[np.ndarray]:
    arma = spec.arma
    if arma.ar is not None and arma.ma is None:
        return var_autocovariance(arma.ar, arma.sigma_eps, max_lag)
    if arma.ar is None and arma.ma is None:
        gammas = [np.zeros_like(arma.sigma_eps) for _ in range(max_lag + 1)]
        gammas[0] = arma.sigma_eps.copy()
        return gammas
    return arma_autocovariance(arma, max_lag)


def toeplitz_sandwich_check(spec: ProcessSpec, n: int, grid_size: int = 8192, slack: float = 1e-4) -> SandwichReport:
    """Check ``2 pi m(f) <= eig(Upsilon_n) <= 2 pi M(f)`` up to grid slack."""
    if n < 1:
        raise ValueError("n must be >= 1")
    report = stability_measures(spec.arma, grid_size)
    gammas = _process_autocov(spec, n - 1)
    ups = block_toeplitz_cov(gammas, n)
    eigs = np.linalg.eigvalsh(ups)
    lower = TWO_PI * report.m_lower
    upper = TWO_PI * report.m_upper
    eig_min, eig_max = float(eigs[0]), float(eigs[-1])
    violation = max(lower - eig_min, eig_max - upper, 0.0)
    return SandwichReport(
        n=n,
        eig_min=eig_min,
        eig_max=eig_max,
        lower=lower,
        upper=upper,
        slack=slack,
        passed=violation <= slack,
        violation=violation,
    )


# ---------------------------------------------------------------------------
# Error-rate audit for penalized VAR estimation
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class RateAuditReport:
    """Observed estimation errors next to their theoretical envelopes."""

    ns: tuple[int, ...]
    k: int
    alpha: float
    omega_lag: float
    omega_companion: float
    rows: ExperimentResult

    def to_dict(self) -> dict:
        return {
            "ns": list(self.ns),
            "k": self.k,
            "alpha": self.alpha,
            "omega_lag": self.omega_lag,
            "omega_companion": self.omega_companion,
            "rows": [
                {
                    "setting": r.setting,
                    "replicate": r.replicate,
                    "metric": r.metric,
                    "value": r.value,
                }
                for r in self.rows.sorted_rows()
            ],
        }


def rate_audit(
    poly: VarPolynomial,
    sigma_eps: np.ndarray,
    ns: list[int],
    replicates: int,
    seed: RngSeed,
    lambda_constant: float = 1.0,
) -> RateAuditReport:
    """Fit l1-LS at the rate penalty across sample sizes and log error bounds.

    The curvature proxy is ``alpha = eigmin(sigma) / (2 mu_max)``; the bound
    envelopes are ``64 k lam / alpha`` (l1), ``16 sqrt(k) lam / alpha`` (l2)
    and ``128 k lam^2 / alpha`` (in-sample prediction).  Two variants of the
    tail weight omega are reported, one from the lag polynomial and one from
    its first-order companion embedding.
    """
    sigma = np.asarray(sigma_eps, dtype=float)
    p, d = poly.p, poly.d
    spec = ProcessSpec(ArmaSpec(ar=poly, ma=None, sigma_eps=sigma))
    truth_vec = np.concatenate([c.T for c in poly.coeffs], axis=0).flatten(order="F")
    k = int(np.count_nonzero(truth_vec))
    if k == 0:
        raise ValueError("transition polynomial is zero")
    mu_min_lag, mu_max_lag = mu_extremes(poly)
    comp_poly = VarPolynomial((companion_matrix(poly),))
    mu_min_comp, _ = mu_extremes(comp_poly)
    eig_sigma = np.linalg.eigvalsh(sigma)
    alpha = float(eig_sigma[0]) / (2.0 * mu_max_lag)
    base = float(eig_sigma[0]) / mu_max_lag
    omega_lag = (float(eig_sigma[-1]) / mu_min_lag) / base
    omega_companion = (float(eig_sigma[-1]) / mu_min_comp) / base
    rows = ExperimentResult()
    for n in ns:
        setting = f"N={n}"
        lam = LambdaRule(constant=lambda_constant, n=n, p_eff=d * p * p).value
        rows.add("rate-audit", setting, "bound", 0, "l1_bound", 64.0 * k * lam / alpha)
        rows.add("rate-audit", setting, "bound", 0, "l2_bound", 16.0 * math.sqrt(k) * lam / alpha)
        rows.add("rate-audit", setting, "bound", 0, "prediction_bound", 128.0 * k * lam * lam / alpha)
        for r in range(replicates):
            data = simulate(spec, n + d, seed.child(f"n{n}/rep{r}"))
            design = build_design(data, d)
            est = fit_l1_ls(design, lam)
            est_vec = est.stacked_vector()
            delta = est_vec - truth_vec
            s = design.predictors.T @ design.predictors / design.n_samples
            delta_mat = delta.reshape(p, d * p).T
            pred = float(np.sum(delta_mat * (s @ delta_mat)))
            rows.add("rate-audit", setting, "l1ls", r, "l1_error", float(np.sum(np.abs(delta))))
            rows.add("rate-audit", setting, "l1ls", r, "l2_error", float(np.linalg.norm(delta)))
            rows.add("rate-audit", setting, "l1ls", r, "prediction_error", pred)
            rows.add("rate-audit", setting, "l1ls", r, "relative_error", relative_error(est, poly))
            extra = np.setdiff1d(np.flatnonzero(est_vec), np.flatnonzero(truth_vec)).size
            rows.add("rate-audit", setting, "l1ls", r, "false_positives", float(extra))
    return RateAuditReport(
        ns=tuple(int(n) for n in ns),
        k=k,
        alpha=alpha,
        omega_lag=omega_lag,
        omega_companion=omega_companion,
        rows=rows,
    )
