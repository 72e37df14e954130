"""Hard-thresholded covariance estimation under temporal dependence.

The threshold scales as ``constant * M(f,2) * sqrt(log p / n)``: the
two-coordinate stability measure controls entrywise deviations of the
sample covariance, so thresholding at that rate kills spurious entries.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .processes import ProcessSpec, RngSeed, simulate
from .results import ExperimentResult
from .spectral import subprocess_stability

DEFAULT_THRESHOLD_CONSTANT = 2.0


@dataclass(frozen=True, eq=False)
class ThresholdedCov:
    """Hard-thresholded covariance estimate."""

    estimate: np.ndarray
    threshold: float
    sample_size: int | None = None

    def __post_init__(self) -> None:
        est = np.asarray(self.estimate, dtype=float)
        if est.ndim != 2 or est.shape[0] != est.shape[1]:
            raise ValueError(f"estimate must be square, got shape {est.shape}")
        if not np.allclose(est, est.T, atol=1e-10):
            raise ValueError("estimate must be symmetric")
        off = est[~np.eye(est.shape[0], dtype=bool)]
        live = off[off != 0.0]
        if live.size and np.abs(live).min() <= self.threshold:
            raise ValueError("surviving off-diagonal entries must exceed the threshold")

    def support(self) -> np.ndarray:
        return self.estimate != 0.0


def sample_cov(data: np.ndarray) -> np.ndarray:
    """Centered sample covariance with 1/n normalisation."""
    data = np.asarray(data, dtype=float)
    if data.ndim != 2 or data.shape[0] < 2:
        raise ValueError("data must be (n, p) with n >= 2")
    centered = data - data.mean(axis=0)
    cov = centered.T @ centered / data.shape[0]
    return (cov + cov.T) / 2.0


def hard_threshold(
    cov: np.ndarray,
    threshold: float,
    sample_size: int | None = None,
    keep_diagonal: bool = False,
) -> ThresholdedCov:
    """Zero every entry with magnitude at most ``threshold``.

    The diagonal is thresholded too unless ``keep_diagonal`` is set.
    """
    if threshold < 0:
        raise ValueError("threshold must be >= 0")
    cov = np.asarray(cov, dtype=float)
    est = np.where(np.abs(cov) > threshold, cov, 0.0)
    if keep_diagonal:
        np.fill_diagonal(est, np.diagonal(cov))
    return ThresholdedCov(estimate=est, threshold=float(threshold), sample_size=sample_size)


def threshold_rule(n: int, p: int, stability_m2: float, constant: float = DEFAULT_THRESHOLD_CONSTANT) -> float:
    """Rate threshold ``constant * stability_m2 * sqrt(log p / n)``."""
    if n < 2 or p < 2:
        raise ValueError("need n >= 2 and p >= 2")
    if stability_m2 <= 0:
        raise ValueError("stability_m2 must be positive")
    if constant <= 0:
        raise ValueError("constant must be positive")
    return constant * stability_m2 * math.sqrt(math.log(p) / n)


def consistency_curve(
    spec: ProcessSpec,
    truth: np.ndarray,
    ns: list[int],
    replicates: int,
    seed: RngSeed,
    constant: float = DEFAULT_THRESHOLD_CONSTANT,
) -> ExperimentResult:
    """Thresholded-estimation error against sample size, raw rows per replicate."""
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    truth = np.asarray(truth, dtype=float)
    p = spec.p
    if truth.shape != (p, p):
        raise ValueError("truth must be p x p")
    m2 = subprocess_stability(spec.arma, 2).value
    result = ExperimentResult()
    true_support = truth != 0.0
    for n in ns:
        u = threshold_rule(n, p, m2, constant)
        setting = f"n={n}"
        for r in range(replicates):
            data = simulate(spec, n, seed.child(f"n{n}/rep{r}"))
            thr = hard_threshold(sample_cov(data), u, sample_size=n)
            err = thr.estimate - truth
            op_err = float(np.linalg.norm(err, 2))
            frob_err = float(np.linalg.norm(err, "fro")) / p
            exact = bool(np.array_equal(thr.support(), true_support))
            result.add("covthresh", setting, "hard-threshold", r, "operator_error", op_err)
            result.add("covthresh", setting, "hard-threshold", r, "frobenius_error_per_p", frob_err)
            result.add("covthresh", setting, "hard-threshold", r, "support_recovered", float(exact))
    return result


def median_curve(result: ExperimentResult, metric: str = "operator_error") -> list[tuple[int, float]]:
    """Per-n medians of a consistency-curve metric, ascending in n."""
    out = []
    for setting in result.settings():
        n = int(setting.split("=", 1)[1])
        vals = result.values(metric, setting=setting)
        out.append((n, float(np.median(vals))))
    return sorted(out)
