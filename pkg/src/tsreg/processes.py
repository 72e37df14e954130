"""Process specification and simulation for Gaussian VAR/ARMA models.

Random draws go through named counter-based streams so that replicate
fan-out is reproducible regardless of execution order.
"""
from __future__ import annotations

import csv
import hashlib
import json
import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .spectral import (
    ArmaSpec,
    VarPolynomial,
    contemporaneous_cov,
    is_stable,
    var_autocovariance,
)

_MAX_SEED = 2**64


@dataclass(frozen=True)
class RngSeed:
    """Seed plus stream label; child labels derive independent substreams."""

    seed: int
    stream: str = ""

    def __post_init__(self) -> None:
        if not (0 <= self.seed < _MAX_SEED):
            raise ValueError("seed must fit in 64 bits")

    def child(self, label: str) -> "RngSeed":
        stream = f"{self.stream}/{label}" if self.stream else label
        return RngSeed(self.seed, stream)

    def generator(self) -> np.random.Generator:
        digest = hashlib.sha256(self.stream.encode("utf-8")).digest()
        words = struct.unpack("<4Q", digest[:32])
        ss = np.random.SeedSequence(entropy=[self.seed, *words])
        return np.random.Generator(np.random.Philox(seed=ss))


class SnrInfeasibleError(ValueError):
    """Requested signal-to-noise ratio exceeds what stability permits."""

    def __init__(self, requested: float, max_achievable: float):
        self.max_achievable = max_achievable
        super().__init__(
            f"snr {requested:.4g} not achievable under the stability cap "
            f"(maximum {max_achievable:.4g})"
        )


@dataclass(frozen=True, eq=False)
class ProcessSpec:
    """Simulable stationary process: ARMA structure plus burn-in policy."""

    arma: ArmaSpec
    burn_in: int = 500

    def __post_init__(self) -> None:
        if self.burn_in < 0:
            raise ValueError("burn_in must be >= 0")
        if self.arma.ar is not None and not is_stable(self.arma.ar).stable:
            raise ValueError("AR polynomial is unstable")
        if self.arma.ma is not None and not is_stable(self.arma.ma).stable:
            raise ValueError("MA polynomial is not invertible")

    @property
    def p(self) -> int:
        return self.arma.p

    @property
    def kind(self) -> str:
        ar, ma = self.arma.ar, self.arma.ma
        if ar is not None and ma is not None:
            return f"ARMA({ar.d},{ma.d})"
        if ar is not None:
            return f"VAR({ar.d})"
        if ma is not None:
            return f"MA({ma.d})"
        return "WHITE"


@dataclass(frozen=True, eq=False)
class ErrorCovFamily:
    """Named innovation-covariance families with unit diagonal."""

    family: str
    rho: float
    p: int

    _FAMILIES = ("identity", "block-i", "block-ii", "toeplitz")

    def __post_init__(self) -> None:
        if self.family not in self._FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; choose from {self._FAMILIES}")
        if self.p < 1:
            raise ValueError("p must be >= 1")
        if not (0.0 <= self.rho < 1.0):
            raise ValueError("rho must lie in [0, 1)")
        if self.family in ("block-i", "block-ii") and self.p % 2:
            raise ValueError("block families need even p")


def build_error_cov(fam: ErrorCovFamily) -> np.ndarray:
    """Materialise the covariance; rejects indefinite results."""
    p, rho = fam.p, fam.rho
    if fam.family == "identity":
        sigma = np.eye(p)
    elif fam.family == "toeplitz":
        idx = np.arange(p)
        sigma = rho ** np.abs(idx[:, None] - idx[None, :])
    else:
        sigma = np.eye(p)
        half = p // 2
        block = np.full((half, half), rho)
        np.fill_diagonal(block, 1.0)
        sigma[:half, :half] = block
        if fam.family == "block-ii":
            sigma[half:, half:] = block
    if np.linalg.eigvalsh(sigma)[0] <= 1e-10:
        raise ValueError(f"covariance family {fam.family} rho={fam.rho} is not positive definite")
    return sigma


def simulate(spec: ProcessSpec, T: int, seed: RngSeed) -> np.ndarray:
    """Iterate the recursion from zero state; burn-in samples are discarded."""
    if T < 1:
        raise ValueError("T must be >= 1")
    arma = spec.arma
    p = arma.p
    try:
        chol = np.linalg.cholesky(arma.sigma_eps)
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"innovation covariance is not positive definite: {exc}") from exc
    rng = seed.generator()
    total = spec.burn_in + T
    d = arma.ar.d if arma.ar is not None else 0
    ell = arma.ma.d if arma.ma is not None else 0
    eps = np.zeros((ell + total, p))
    eps[ell:] = rng.standard_normal((total, p)) @ chol.T
    x = np.zeros((d + total, p))
    a_coeffs = arma.ar.coeffs if arma.ar is not None else ()
    b_coeffs = arma.ma.coeffs if arma.ma is not None else ()
    for t in range(total):
        val = eps[t + ell].copy()
        for s, a in enumerate(a_coeffs, start=1):
            val += a @ x[t + d - s]
        for j, b in enumerate(b_coeffs, start=1):
            val -= b @ eps[t + ell - j]
        x[t + d] = val
    return x[d + spec.burn_in :]


def _snr_functional(poly: VarPolynomial, sigma: np.ndarray) -> float:
    gamma0 = var_autocovariance(poly, sigma, 0)[0]
    return math.sqrt(np.trace(gamma0) / np.trace(sigma))


def gen_sparse_transition(
    p: int,
    density: float,
    snr: float,
    seed: RngSeed,
    sigma_eps: np.ndarray | None = None,
    radius_cap: float = 0.95,
) -> VarPolynomial:
    """Random sparse lag-one transition rescaled to a target snr.

    Support size is exactly ``ceil(density * p^2)``; magnitudes are signed
    Uniform(0.5, 1) before the scalar rescaling.  ``snr`` is the square root
    of ``trace(Gamma(0)) / trace(sigma_eps)``, monotone in the scaling, so a
    bisection under the companion-radius cap pins it down.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    if not (0.0 < density <= 1.0):
        raise ValueError("density must lie in (0, 1]")
    if snr < 1.0:
        raise SnrInfeasibleError(snr, 1.0)
    sigma = np.eye(p) if sigma_eps is None else np.asarray(sigma_eps, dtype=float)
    rng = seed.generator()
    m = math.ceil(density * p * p)
    support = rng.choice(p * p, size=m, replace=False)
    magnitudes = rng.uniform(0.5, 1.0, size=m)
    signs = rng.integers(0, 2, size=m) * 2 - 1
    flat = np.zeros(p * p)
    flat[support] = signs * magnitudes
    raw = flat.reshape(p, p)
    rho_raw = float(np.max(np.abs(np.linalg.eigvals(raw))))

    def snr_at(c: float) -> float:
        return _snr_functional(VarPolynomial((c * raw,)), sigma)

    if rho_raw > 0.0:
        hi = radius_cap * (1.0 - 1e-9) / rho_raw
        if snr_at(hi) < snr:
            raise SnrInfeasibleError(snr, snr_at(hi))
    else:
        hi = 1.0
        while snr_at(hi) < snr:
            hi *= 2.0
            if hi > 1e9:
                raise SnrInfeasibleError(snr, snr_at(1e9))
    lo = 0.0
    for _ in range(200):
        mid = (lo + hi) / 2.0
        val = snr_at(mid)
        if abs(val - snr) <= 1e-6 * snr:
            lo = hi = mid
            break
        if val < snr:
            lo = mid
        else:
            hi = mid
    c = (lo + hi) / 2.0
    poly = VarPolynomial((c * raw,))
    check = is_stable(poly, margin=0.05)
    if not check.stable:  # pragma: no cover - cap keeps radius strictly inside
        poly = poly.scale((1.0 - 0.05 - 1e-9) / check.spectral_radius)
    return poly


def triangular_band_var_spec(p: int, alpha: float = 0.2, gamma: float = 0.0) -> ProcessSpec:
    """Upper-triangular lag-one transition: ``alpha`` diagonal, ``gamma`` on
    the first two superdiagonal bands, identity innovations."""
    if p < 1:
        raise ValueError("p must be >= 1")
    a = np.zeros((p, p))
    np.fill_diagonal(a, alpha)
    for off in (1, 2):
        idx = np.arange(p - off)
        a[idx, idx + off] = gamma
    poly = VarPolynomial((a,))
    check = is_stable(poly)
    if not check.stable:
        raise ValueError(f"transition is unstable (radius {check.spectral_radius:.4f})")
    return ProcessSpec(ArmaSpec(ar=poly, ma=None, sigma_eps=np.eye(p)))


def repeated_ar2_spec(p: int, alpha: float) -> ProcessSpec:
    """p independent AR(2) components with lag weights (2a, -a^2) and unit
    marginal variance."""
    if p < 1:
        raise ValueError("p must be >= 1")
    if not (0.0 <= alpha < 1.0):
        raise ValueError("alpha must lie in [0, 1)")
    scalar = VarPolynomial((np.array([[2.0 * alpha]]), np.array([[-(alpha**2)]])))
    gamma0_unit = var_autocovariance(scalar, np.array([[1.0]]), 0)[0][0, 0]
    sigma2 = 1.0 / gamma0_unit
    poly = VarPolynomial((2.0 * alpha * np.eye(p), -(alpha**2) * np.eye(p)))
    return ProcessSpec(ArmaSpec(ar=poly, ma=None, sigma_eps=sigma2 * np.eye(p)))


@dataclass(frozen=True, eq=False)
class RegressionScenario:
    """Stochastic regression: serially dependent predictors and noise."""

    beta_star: np.ndarray
    predictor_spec: ProcessSpec
    noise_spec: ProcessSpec
    snr: float | None = None

    def __post_init__(self) -> None:
        beta = np.asarray(self.beta_star, dtype=float).ravel()
        object.__setattr__(self, "beta_star", beta)
        if beta.size != self.predictor_spec.p:
            raise ValueError("beta_star length must match predictor dimension")
        if self.noise_spec.p != 1:
            raise ValueError("noise process must be univariate")
        if self.snr is not None and self.snr <= 0.0:
            raise ValueError("snr must be positive when given")


def simulate_regression(scn: RegressionScenario, n: int, seed: RngSeed) -> tuple[np.ndarray, np.ndarray]:
    """Draw (X, y) with the noise path rescaled to the population sd ratio."""
    x = simulate(scn.predictor_spec, n, seed.child("predictors"))
    noise = simulate(scn.noise_spec, n, seed.child("noise"))[:, 0]
    beta = scn.beta_star
    if not np.any(beta):
        if scn.snr is not None:
            raise ValueError("zero beta_star cannot meet a positive snr")
        return x, noise
    signal = x @ beta
    if scn.snr is None:
        return x, signal + noise
    g0 = contemporaneous_cov(scn.predictor_spec.arma)
    sd_signal = math.sqrt(float(beta @ g0 @ beta))
    sd_noise = math.sqrt(float(contemporaneous_cov(scn.noise_spec.arma)[0, 0]))
    scale = sd_signal / (scn.snr * sd_noise)
    return x, signal + scale * noise


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def _poly_to_lists(poly: VarPolynomial | None):
    if poly is None:
        return None
    return [c.tolist() for c in poly.coeffs]


def _poly_from_lists(data) -> VarPolynomial | None:
    if data is None:
        return None
    return VarPolynomial(tuple(np.asarray(c, dtype=float) for c in data))


def spec_to_dict(spec: ProcessSpec) -> dict:
    return {
        "ar": _poly_to_lists(spec.arma.ar),
        "ma": _poly_to_lists(spec.arma.ma),
        "sigma": spec.arma.sigma_eps.tolist(),
        "burn_in": spec.burn_in,
    }


def spec_from_dict(d: dict) -> ProcessSpec:
    if "sigma" not in d:
        raise ValueError("process spec needs a 'sigma' entry")
    arma = ArmaSpec(
        ar=_poly_from_lists(d.get("ar")),
        ma=_poly_from_lists(d.get("ma")),
        sigma_eps=np.asarray(d["sigma"], dtype=float),
    )
    return ProcessSpec(arma=arma, burn_in=int(d.get("burn_in", 500)))


def write_dataset(path: str | Path, data: np.ndarray, spec: ProcessSpec, seed: RngSeed) -> None:
    """CSV with rows = time, columns = series, plus a JSON sidecar."""
    path = Path(path)
    data = np.atleast_2d(np.asarray(data, dtype=float))
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        for row in data:
            writer.writerow([repr(float(v)) for v in row])
    sidecar = {
        "spec": spec_to_dict(spec),
        "seed": {"seed": seed.seed, "stream": seed.stream},
        "burn_in": spec.burn_in,
        "rows": int(data.shape[0]),
        "columns": int(data.shape[1]),
    }
    path.with_suffix(path.suffix + ".json").write_text(json.dumps(sidecar, indent=2, sort_keys=True))


def read_dataset(path: str | Path) -> np.ndarray:
    """Read a raw CSV series (no header row)."""
    data = np.loadtxt(path, delimiter=",", ndmin=2)
    return data
