"""Transition-matrix estimation for VAR(d) by penalized regression.

The lag-stacked regression uses rows ``[X^{t+d-1}', ..., X^t']`` to predict
``X^{t+d}``; coefficient blocks stack as ``B = [A_1', ..., A_d']`` (dp x p).
Least-squares estimation separates across output columns; the likelihood
weighting couples them through an implicit Kronecker Gram.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .solver import (
    DenseGram,
    KroneckerGram,
    L1Fit,
    LambdaRule,
    QuadraticL1Problem,
    lambda_grid,
    solve,
)
from .spectral import VarPolynomial

METHOD_OLS = "ols"
METHOD_RIDGE = "ridge"
METHOD_L1_LS = "l1ls"
METHOD_L1_LL = "l1ll"
METHOD_L1_LL_ORACLE = "l1ll-oracle"

_RIDGE_DELTA_FRACTION = 1e-6
_MIN_EIG = 1e-8


@dataclass(frozen=True, eq=False)
class VarDesign:
    """Lag-stacked regression data for a VAR(d) fit."""

    response: np.ndarray
    predictors: np.ndarray
    d: int

    def __post_init__(self) -> None:
        y = np.asarray(self.response, dtype=float)
        x = np.asarray(self.predictors, dtype=float)
        if y.ndim != 2 or x.ndim != 2:
            raise ValueError("response and predictors must be 2-d")
        if y.shape[0] != x.shape[0]:
            raise ValueError("response and predictors must have equal row counts")
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if x.shape[1] != self.d * y.shape[1]:
            raise ValueError("predictor width must equal d * p")
        object.__setattr__(self, "response", y)
        object.__setattr__(self, "predictors", x)

    @property
    def n_samples(self) -> int:
        return self.response.shape[0]

    @property
    def p(self) -> int:
        return self.response.shape[1]


def build_design(data: np.ndarray, d: int) -> VarDesign:
    """Stack lagged rows of a (T+1, p) sample path into regression form."""
    data = np.asarray(data, dtype=float)
    if data.ndim != 2:
        raise ValueError("data must be 2-d with rows = time")
    if d < 1:
        raise ValueError("d must be >= 1")
    t_max = data.shape[0] - 1
    if t_max < d:
        raise ValueError(f"need at least d+1 = {d + 1} rows, got {data.shape[0]}")
    n = t_max - d + 1
    p = data.shape[1]
    response = data[d:]
    predictors = np.empty((n, d * p))
    for lag in range(1, d + 1):
        predictors[:, (lag - 1) * p : lag * p] = data[d - lag : d - lag + n]
    return VarDesign(response=response, predictors=predictors, d=d)


@dataclass(frozen=True, eq=False)
class VarEstimate:
    """Estimated transition polynomial plus fit provenance."""

    coeffs: VarPolynomial
    method: str
    lam: float | None = None
    sigma_used: np.ndarray | None = None
    kkt_residual: float | None = None
    converged: bool | None = None

    def stacked_vector(self) -> np.ndarray:
        return _poly_to_stacked(self.coeffs).flatten(order="F")

    def to_dict(self) -> dict:
        lags = {}
        for t, mat in enumerate(self.coeffs.coeffs, start=1):
            rows, cols = np.nonzero(mat)
            lags[f"lag{t}"] = [[int(i), int(j), float(mat[i, j])] for i, j in zip(rows, cols)]
        return {
            "p": self.coeffs.p,
            "d": self.coeffs.d,
            "method": self.method,
            "lambda": None if self.lam is None else float(self.lam),
            "coefficients": lags,
            "kkt_residual": None if self.kkt_residual is None else float(self.kkt_residual),
            "converged": self.converged,
            "sigma_used": None if self.sigma_used is None else np.asarray(self.sigma_used).tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "VarEstimate":
        p = int(d["p"])
        mats = []
        for t in range(1, int(d["d"]) + 1):
            m = np.zeros((p, p))
            for i, j, v in d["coefficients"][f"lag{t}"]:
                m[int(i), int(j)] = float(v)
            mats.append(m)
        sigma = d.get("sigma_used")
        return cls(
            coeffs=VarPolynomial(tuple(mats)),
            method=str(d["method"]),
            lam=None if d.get("lambda") is None else float(d["lambda"]),
            sigma_used=None if sigma is None else np.asarray(sigma, dtype=float),
            kkt_residual=d.get("kkt_residual"),
            converged=d.get("converged"),
        )


def _stacked_to_poly(b: np.ndarray, d: int, p: int) -> VarPolynomial:
    return VarPolynomial(tuple(b[(t - 1) * p : t * p, :].T for t in range(1, d + 1)))


def _poly_to_stacked(poly: VarPolynomial) -> np.ndarray:
    return np.concatenate([c.T for c in poly.coeffs], axis=0)


def _design_moments(design: VarDesign) -> tuple[np.ndarray, np.ndarray]:
    n = design.n_samples
    s = design.predictors.T @ design.predictors / n
    xy = design.predictors.T @ design.response / n
    return (s + s.T) / 2.0, xy


def default_lambda(design: VarDesign, constant: float = 1.0) -> float:
    """Rate penalty with effective dimension d * p^2."""
    return LambdaRule(constant=constant, n=design.n_samples, p_eff=design.d * design.p**2).value


def fit_l1_ls(design: VarDesign, lam: float, **kwargs) -> VarEstimate:
    """l1-penalized least squares; output columns decouple."""
    s, xy = _design_moments(design)
    gram = DenseGram(s)
    p, d = design.p, design.d
    b = np.empty((d * p, p))
    worst_kkt = 0.0
    all_conv = True
    for c in range(p):
        fit = solve(QuadraticL1Problem(gram=gram, linear=xy[:, c], lam=lam), **kwargs)
        b[:, c] = fit.beta_hat
        worst_kkt = max(worst_kkt, fit.kkt_residual)
        all_conv = all_conv and fit.converged
    return VarEstimate(
        coeffs=_stacked_to_poly(b, d, p),
        method=METHOD_L1_LS,
        lam=lam,
        kkt_residual=worst_kkt,
        converged=all_conv,
    )


def _weight_matrix(sigma_eps: np.ndarray, p: int) -> np.ndarray:
    sigma = np.asarray(sigma_eps, dtype=float)
    if sigma.shape != (p, p):
        raise ValueError(f"sigma_eps must be {p}x{p}")
    try:
        np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"sigma_eps is not positive definite: {exc}") from exc
    w = np.linalg.inv(sigma)
    return (w + w.T) / 2.0


def fit_l1_ll(
    design: VarDesign,
    lam: float,
    sigma_eps: np.ndarray,
    method: str = METHOD_L1_LL_ORACLE,
    init: np.ndarray | None = None,
    **kwargs,
) -> VarEstimate:
    """l1-penalized likelihood-weighted fit at a fixed innovation covariance."""
    s, xy = _design_moments(design)
    p, d = design.p, design.d
    w = _weight_matrix(sigma_eps, p)
    gram = KroneckerGram(w, s)
    linear = (xy @ w).flatten(order="F")
    fit = solve(QuadraticL1Problem(gram=gram, linear=linear, lam=lam), init=init, **kwargs)
    b = fit.beta_hat.reshape(p, d * p).T
    return VarEstimate(
        coeffs=_stacked_to_poly(b, d, p),
        method=method,
        lam=lam,
        sigma_used=np.asarray(sigma_eps, dtype=float),
        kkt_residual=fit.kkt_residual,
        converged=fit.converged,
    )


def residuals(design: VarDesign, estimate: VarEstimate) -> np.ndarray:
    return design.response - design.predictors @ _poly_to_stacked(estimate.coeffs)


def estimate_sigma_from_residuals(design: VarDesign, estimate: VarEstimate) -> np.ndarray:
    """Uncentered residual covariance, ridge-repaired when near-singular."""
    r = residuals(design, estimate)
    sigma = r.T @ r / design.n_samples
    sigma = (sigma + sigma.T) / 2.0
    if np.linalg.eigvalsh(sigma)[0] < _MIN_EIG:
        delta = _RIDGE_DELTA_FRACTION * float(np.trace(sigma)) / design.p
        sigma = sigma + delta * np.eye(design.p)
    return sigma


def fit_l1_ll_plugin(design: VarDesign, lam: float, ls_lam: float | None = None) -> VarEstimate:
    """Pipeline: l1-LS fit, residual covariance, likelihood-weighted refit."""
    ls = fit_l1_ls(design, lam if ls_lam is None else ls_lam)
    sigma_hat = estimate_sigma_from_residuals(design, ls)
    est = fit_l1_ll(design, lam, sigma_hat, method=METHOD_L1_LL)
    return est


def fit_ols(design: VarDesign) -> VarEstimate:
    """Column-wise normal equations with a pivot guard."""
    n = design.n_samples
    g = design.predictors.T @ design.predictors
    try:
        chol = np.linalg.cholesky(g / n)
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"normal equations are singular: {exc}") from exc
    pivots = np.diagonal(chol) ** 2
    if float(pivots.min()) <= 1e-10 * float(pivots.max()):
        raise ValueError("normal equations are numerically singular")
    rhs = design.predictors.T @ design.response / n
    z = np.linalg.solve(chol, rhs)
    b = np.linalg.solve(chol.T, z)
    return VarEstimate(coeffs=_stacked_to_poly(b, design.d, design.p), method=METHOD_OLS)


def fit_ridge(design: VarDesign, lam: float) -> VarEstimate:
    if lam <= 0:
        raise ValueError("ridge penalty must be positive")
    s, xy = _design_moments(design)
    b = np.linalg.solve(s + lam * np.eye(s.shape[0]), xy)
    return VarEstimate(coeffs=_stacked_to_poly(b, design.d, design.p), method=METHOD_RIDGE, lam=lam)


# ---------------------------------------------------------------------------
# Penalty paths and selection metrics
# ---------------------------------------------------------------------------


def coefficient_path(
    design: VarDesign,
    lambdas=None,
    sigma_eps: np.ndarray | None = None,
    points: int = 50,
) -> list[tuple[float, np.ndarray]]:
    """Warm-started stacked-coefficient path, largest penalty first.

    Without ``sigma_eps`` this is the least-squares path (columns decouple);
    with it, the likelihood-weighted path.  The default grid runs two decades
    down from the smallest penalty that zeroes everything.
    """
    s, xy = _design_moments(design)
    p, d = design.p, design.d
    if sigma_eps is None:
        gram = DenseGram(s)
        linear_full = xy
        lam_max = 2.0 * float(np.max(np.abs(xy)))
    else:
        w = _weight_matrix(sigma_eps, p)
        gram = KroneckerGram(w, s)
        linear = (xy @ w).flatten(order="F")
        lam_max = 2.0 * float(np.max(np.abs(linear)))
    if lambdas is None:
        if lam_max <= 0:
            raise ValueError("degenerate design: all moments vanish")
        lams = lambda_grid(lam_max, points=points)
    else:
        lams = [float(v) for v in lambdas]
    out: list[tuple[float, np.ndarray]] = []
    if sigma_eps is None:
        warm = [None] * p
        betas = np.empty((d * p, p))
        for lam in lams:
            for c in range(p):
                fit = solve(QuadraticL1Problem(gram=gram, linear=linear_full[:, c], lam=lam), init=warm[c])
                warm[c] = fit.beta_hat
                betas[:, c] = fit.beta_hat
            out.append((float(lam), betas.flatten(order="F")))
    else:
        warm = None
        for lam in lams:
            fit = solve(QuadraticL1Problem(gram=gram, linear=linear, lam=lam), init=warm)
            warm = fit.beta_hat
            out.append((float(lam), fit.beta_hat.copy()))
    return out


def auroc(path: list[tuple[float, np.ndarray]], truth_support: np.ndarray) -> float:
    """Area under the support-recovery ROC along a penalty path.

    A coordinate's score is the largest penalty at which it is active, with
    final magnitude breaking ties; ties in the ranking get half credit.
    """
    if not path:
        raise ValueError("path must be nonempty")
    q = np.asarray(path[0][1]).size
    truth = np.zeros(q, dtype=bool)
    truth[np.asarray(truth_support, dtype=int)] = True
    pos = int(truth.sum())
    if pos == 0 or pos == q:
        raise ValueError("truth support must be nonempty and proper")
    entry = np.zeros(q)
    for lam, beta in path:
        beta = np.asarray(beta).ravel()
        if beta.size != q:
            raise ValueError("inconsistent coefficient sizes along path")
        newly = (beta != 0.0) & (entry == 0.0)
        entry[newly] = lam
    final = np.abs(np.asarray(path[-1][1]).ravel())
    order = np.lexsort((final, entry))
    ranks = np.empty(q)
    sorted_entry = entry[order]
    sorted_final = final[order]
    i = 0
    while i < q:
        j = i
        while j + 1 < q and sorted_entry[j + 1] == sorted_entry[i] and sorted_final[j + 1] == sorted_final[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    rank_sum = float(ranks[truth].sum())
    return (rank_sum - pos * (pos + 1) / 2.0) / (pos * (q - pos))


def relative_error(estimate: VarEstimate | VarPolynomial, truth: VarPolynomial) -> float:
    """Frobenius error of the stacked coefficients relative to the truth."""
    poly = estimate.coeffs if isinstance(estimate, VarEstimate) else estimate
    if poly.p != truth.p or poly.d != truth.d:
        raise ValueError("estimate and truth dimensions differ")
    denom = math.sqrt(sum(float(np.sum(c * c)) for c in truth.coeffs))
    if denom == 0.0:
        raise ValueError("truth polynomial is zero")
    num = math.sqrt(
        sum(float(np.sum((a - b) ** 2)) for a, b in zip(poly.coeffs, truth.coeffs))
    )
    return num / denom


def support_vector(poly: VarPolynomial) -> np.ndarray:
    """Indices of active stacked coefficients, in path coordinate order."""
    return np.flatnonzero(_poly_to_stacked(poly).flatten(order="F"))


def forecast_one_step(estimate: VarEstimate, recent: np.ndarray) -> np.ndarray:
    """Predict the next observation from the most recent d rows."""
    recent = np.atleast_2d(np.asarray(recent, dtype=float))
    poly = estimate.coeffs
    if recent.shape[0] < poly.d or recent.shape[1] != poly.p:
        raise ValueError(f"need at least {poly.d} rows of width {poly.p}")
    out = np.zeros(poly.p)
    for t, mat in enumerate(poly.coeffs, start=1):
        out += mat @ recent[-t]
    return out


@dataclass(frozen=True, eq=False)
class SelectionMetrics:
    """Support-recovery and estimation accuracy for one replicate."""

    auroc: float | None
    relative_error: float
    method: str

    def __post_init__(self) -> None:
        if self.auroc is not None and not (0.0 <= self.auroc <= 1.0):
            raise ValueError("auroc must lie in [0, 1]")
        if self.relative_error < 0.0:
            raise ValueError("relative_error must be >= 0")
