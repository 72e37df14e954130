"""Spectral analysis of stationary Gaussian VAR/ARMA processes.

Stability of a process is summarised by extrema of its matrix spectral
density over the unit circle (``M``/``m``), by extreme singular values of
the characteristic lag polynomial (``mu``), and by sparse-subprocess
variants of ``M``.  Autocovariances are recovered from the companion-form
stationary covariance.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

TWO_PI = 2.0 * math.pi
DEFAULT_GRID = 2048
SUBSET_CAP = 10_000

_LYAPUNOV_TOL = 1e-12
_LYAPUNOV_RESIDUAL = 1e-8
_CHUNK = 512
_SYM_TOL = 1e-10


def _freeze(m: np.ndarray) -> np.ndarray:
    out = np.array(m, dtype=float)
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class VarPolynomial:
    """Matrix lag polynomial ``I - sum_t C_t z^t`` stored via ``C_1..C_d``."""

    coeffs: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        mats = tuple(np.atleast_2d(np.asarray(c, dtype=float)) for c in self.coeffs)
        if not mats:
            raise ValueError("need at least one coefficient matrix")
        p = mats[0].shape[0]
        for m in mats:
            if m.ndim != 2 or m.shape != (p, p):
                raise ValueError(f"coefficients must all be {p}x{p}, got {m.shape}")
            if not np.all(np.isfinite(m)):
                raise ValueError("coefficients must be finite")
        object.__setattr__(self, "coeffs", tuple(_freeze(m) for m in mats))

    @property
    def p(self) -> int:
        return self.coeffs[0].shape[0]

    @property
    def d(self) -> int:
        return len(self.coeffs)

    def stacked(self) -> np.ndarray:
        """Coefficients as a (d, p, p) array."""
        return np.stack(self.coeffs)

    def scale(self, c: float) -> "VarPolynomial":
        return VarPolynomial(tuple(c * m for m in self.coeffs))


def _check_sigma(sigma: np.ndarray, name: str = "sigma_eps") -> np.ndarray:
    s = np.atleast_2d(np.asarray(sigma, dtype=float))
    if s.shape[0] != s.shape[1]:
        raise ValueError(f"{name} must be square, got {s.shape}")
    if np.max(np.abs(s - s.T)) > _SYM_TOL * max(1.0, np.max(np.abs(s))):
        raise ValueError(f"{name} must be symmetric")
    s = (s + s.T) / 2.0
    if np.linalg.eigvalsh(s)[0] <= _SYM_TOL:
        raise ValueError(f"{name} must be positive definite")
    return _freeze(s)


@dataclass(frozen=True, eq=False)
class ArmaSpec:
    """Stationary process ``A(L) X = B(L) eps`` with Gaussian innovations.

    Either polynomial may be ``None``: pure MA (no AR part), pure AR (no MA
    part), or white noise (neither).  Both polynomials share the convention
    ``I - sum_t C_t z^t``, so the MA recursion subtracts lagged innovations.
    """

    ar: VarPolynomial | None
    ma: VarPolynomial | None
    sigma_eps: np.ndarray

    def __post_init__(self) -> None:
        sigma = _check_sigma(self.sigma_eps)
        object.__setattr__(self, "sigma_eps", sigma)
        p = sigma.shape[0]
        for poly, name in ((self.ar, "ar"), (self.ma, "ma")):
            if poly is not None and poly.p != p:
                raise ValueError(f"{name} dimension {poly.p} != sigma dimension {p}")

    @property
    def p(self) -> int:
        return self.sigma_eps.shape[0]


class StabilityCheck(NamedTuple):
    stable: bool
    spectral_radius: float


class SubprocessStability(NamedTuple):
    value: float
    exact: bool


@dataclass(frozen=True)
class StabilityReport:
    """Grid estimates of spectral-density extrema and polynomial extrema."""

    m_upper: float
    m_lower: float
    mu_min: float
    mu_max: float
    grid_size: int
    k_sparse: dict[int, float] | None = None

    def __post_init__(self) -> None:
        if not (0.0 <= self.m_lower <= self.m_upper + 1e-12):
            raise ValueError("need 0 <= m_lower <= m_upper")
        if not (0.0 <= self.mu_min <= self.mu_max + 1e-12):
            raise ValueError("need 0 <= mu_min <= mu_max")
        if self.k_sparse:
            vals = [self.k_sparse[k] for k in sorted(self.k_sparse)]
            diffs = np.diff(vals)
            if np.any(diffs < -1e-9 * max(1.0, self.m_upper)):
                raise ValueError("k_sparse values must be nondecreasing in k")

    def to_dict(self) -> dict:
        d = {
            "m_upper": self.m_upper,
            "m_lower": self.m_lower,
            "mu_min": self.mu_min,
            "mu_max": self.mu_max,
            "grid_size": self.grid_size,
            "k_sparse": None,
        }
        if self.k_sparse is not None:
            d["k_sparse"] = {str(k): v for k, v in sorted(self.k_sparse.items())}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "StabilityReport":
        ks = d.get("k_sparse")
        return cls(
            m_upper=float(d["m_upper"]),
            m_lower=float(d["m_lower"]),
            mu_min=float(d["mu_min"]),
            mu_max=float(d["mu_max"]),
            grid_size=int(d["grid_size"]),
            k_sparse=None if ks is None else {int(k): float(v) for k, v in ks.items()},
        )


@dataclass(frozen=True, eq=False)
class HermitianSpectrum:
    """Spectral density value at a single frequency."""

    theta: float
    value: np.ndarray

    def __post_init__(self) -> None:
        if not (-math.pi - 1e-12 <= self.theta <= math.pi + 1e-12):
            raise ValueError("theta must lie in [-pi, pi]")
        v = np.asarray(self.value, dtype=complex)
        if np.max(np.abs(v - v.conj().T)) > _SYM_TOL * max(1.0, np.max(np.abs(v))):
            raise ValueError("spectral density must be Hermitian")
        v = (v + v.conj().T) / 2.0
        if hermitian_eigvals(v)[0] < -_SYM_TOL * max(1.0, np.max(np.abs(v))):
            raise ValueError("spectral density must be positive semidefinite")
        v.flags.writeable = False
        object.__setattr__(self, "value", v)


# ---------------------------------------------------------------------------
# Lag polynomial basics
# ---------------------------------------------------------------------------


def companion_matrix(poly: VarPolynomial) -> np.ndarray:
    """First-order companion form: top block row C_1..C_d, identity subdiagonal."""
    p, d = poly.p, poly.d
    comp = np.zeros((d * p, d * p))
    comp[:p] = np.concatenate(poly.coeffs, axis=1)
    if d > 1:
        comp[p:, : (d - 1) * p] = np.eye((d - 1) * p)
    return comp


def is_stable(poly: VarPolynomial, margin: float = 0.0) -> StabilityCheck:
    """Check that the companion spectral radius is below ``1 - margin``."""
    if not (0.0 <= margin < 1.0):
        raise ValueError("margin must lie in [0, 1)")
    try:
        eigs = np.linalg.eigvals(companion_matrix(poly))
    except np.linalg.LinAlgError as exc:  # pragma: no cover - numerics
        raise RuntimeError(f"companion eigenvalue computation failed: {exc}") from exc
    radius = float(np.max(np.abs(eigs))) if eigs.size else 0.0
    return StabilityCheck(stable=radius < 1.0 - margin, spectral_radius=radius)


def eval_char_poly(poly: VarPolynomial, z: complex) -> np.ndarray:
    """Evaluate ``I - sum_t C_t z^t`` at a complex point."""
    acc = np.eye(poly.p, dtype=complex)
    zt = 1.0 + 0.0j
    for c in poly.coeffs:
        zt = zt * z
        acc = acc - c * zt
    return acc


def frequency_grid(grid_size: int) -> np.ndarray:
    """Uniform grid on [-pi, pi); doubling the size nests the grid exactly."""
    if grid_size < 64:
        raise ValueError("grid_size must be at least 64")
    return -math.pi + TWO_PI * np.arange(grid_size) / grid_size


def _char_poly_grid(poly: VarPolynomial, thetas: np.ndarray) -> np.ndarray:
    """Vectorised evaluation at z = exp(i theta): (G, p, p) complex.

    The sign matches the covariance orientation Gamma(h) = Cov(X_t, X_{t+h}),
    so that the density is the Fourier sum of those matrices with e^{-ih theta}
    weights.  Extrema over the grid are unaffected (the grid is symmetric),
    but off-diagonal phases of individual density values are not.
    """
    z = np.exp(1j * thetas)
    powers = z[None, :] ** np.arange(1, poly.d + 1)[:, None]
    vals = np.einsum("tg,tij->gij", powers, poly.stacked())
    return np.eye(poly.p, dtype=complex)[None] - vals


def hermitian_eigvals(h: np.ndarray) -> np.ndarray:
    """Eigenvalues of Hermitian matrices via the real symmetric embedding.

    ``[[X, -Y], [Y, X]]`` has the eigenvalues of ``X + iY`` doubled, so every
    other entry of the ascending spectrum recovers them.
    """
    h = np.asarray(h, dtype=complex)
    x, y = h.real, h.imag
    top = np.concatenate([x, -y], axis=-1)
    bottom = np.concatenate([y, x], axis=-1)
    emb = np.concatenate([top, bottom], axis=-2)
    return np.linalg.eigvalsh(emb)[..., ::2]


# ---------------------------------------------------------------------------
# Spectral density
# ---------------------------------------------------------------------------


def _check_spec_stable(spec: ArmaSpec) -> None:
    if spec.ar is not None and not is_stable(spec.ar).stable:
        raise ValueError("AR polynomial is unstable")
    if spec.ma is not None and not is_stable(spec.ma).stable:
        raise ValueError("MA polynomial is not invertible")


def _density_chunk(spec: ArmaSpec, thetas: np.ndarray) -> np.ndarray:
    sigma = spec.sigma_eps
    if spec.ma is not None:
        b = _char_poly_grid(spec.ma, thetas)
        mid = b @ sigma @ b.conj().transpose(0, 2, 1)
    else:
        mid = np.broadcast_to(sigma.astype(complex), (thetas.size, *sigma.shape)).copy()
    if spec.ar is not None:
        a = _char_poly_grid(spec.ar, thetas)
        try:
            ainv = np.linalg.inv(a)
        except np.linalg.LinAlgError as exc:
            raise RuntimeError(f"characteristic polynomial singular on the unit circle: {exc}") from exc
        f = ainv @ mid @ ainv.conj().transpose(0, 2, 1) / TWO_PI
    else:
        f = mid / TWO_PI
    return (f + f.conj().transpose(0, 2, 1)) / 2.0


def _density_chunks(spec: ArmaSpec, thetas: np.ndarray, chunk: int = _CHUNK) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    for start in range(0, thetas.size, chunk):
        block = thetas[start : start + chunk]
        yield block, _density_chunk(spec, block)


def spectral_density(spec: ArmaSpec, theta: float) -> HermitianSpectrum:
    """Spectral density matrix at one frequency."""
    _check_spec_stable(spec)
    f = _density_chunk(spec, np.asarray([float(theta)]))[0]
    return HermitianSpectrum(theta=float(theta), value=f)


def spectral_density_grid(spec: ArmaSpec, grid_size: int = DEFAULT_GRID) -> tuple[np.ndarray, np.ndarray]:
    """Materialised density over the default frequency grid: (thetas, (G,p,p))."""
    _check_spec_stable(spec)
    thetas = frequency_grid(grid_size)
    blocks = [f for _, f in _density_chunks(spec, thetas)]
    return thetas, np.concatenate(blocks, axis=0)


def mu_extremes(poly: VarPolynomial, grid_size: int = DEFAULT_GRID) -> tuple[float, float]:
    """Extreme eigenvalues of A*(z)A(z) over the unit-circle grid."""
    thetas = frequency_grid(grid_size)
    lo, hi = math.inf, -math.inf
    for start in range(0, grid_size, _CHUNK):
        a = _char_poly_grid(poly, thetas[start : start + _CHUNK])
        m = a.conj().transpose(0, 2, 1) @ a
        w = hermitian_eigvals(m)
        lo = min(lo, float(w[..., 0].min()))
        hi = max(hi, float(w[..., -1].max()))
    return max(lo, 0.0), hi


def _density_extremes(spec: ArmaSpec, grid_size: int) -> tuple[float, float]:
    thetas = frequency_grid(grid_size)
    lo, hi = math.inf, -math.inf
    for _, f in _density_chunks(spec, thetas):
        w = hermitian_eigvals(f)
        lo = min(lo, float(w[..., 0].min()))
        hi = max(hi, float(w[..., -1].max()))
    return max(lo, 0.0), hi


def stability_measures(
    spec: ArmaSpec,
    grid_size: int = DEFAULT_GRID,
    k_values: tuple[int, ...] | None = None,
) -> StabilityReport:
    """Grid scan of density extrema plus polynomial extrema in one report."""
    _check_spec_stable(spec)
    m_lower, m_upper = _density_extremes(spec, grid_size)
    if spec.ar is not None:
        mu_min, mu_max = mu_extremes(spec.ar, grid_size)
    else:
        mu_min, mu_max = 1.0, 1.0
    k_sparse = None
    if k_values:
        k_sparse = {int(k): subprocess_stability(spec, int(k), grid_size).value for k in k_values}
    return StabilityReport(
        m_upper=m_upper,
        m_lower=m_lower,
        mu_min=mu_min,
        mu_max=mu_max,
        grid_size=grid_size,
        k_sparse=k_sparse,
    )


def _pair_max_eigvals(f: np.ndarray, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    """Largest eigenvalue of 2x2 Hermitian principal submatrices, closed form."""
    a = f[:, rows, rows].real
    c = f[:, cols, cols].real
    b = f[:, rows, cols]
    half = (a - c) / 2.0
    return (a + c) / 2.0 + np.sqrt(half * half + (b * b.conj()).real)


def subprocess_stability(
    spec: ArmaSpec,
    k: int,
    grid_size: int = DEFAULT_GRID,
    cap: int = SUBSET_CAP,
) -> SubprocessStability:
    """Max density eigenvalue over coordinate subsets of size <= k.

    Exhausts all subsets of size exactly k (eigenvalue interlacing makes the
    maximum monotone in the subset, so smaller supports never win).  When the
    subset count exceeds ``cap`` the full-process upper bound is returned with
    ``exact=False``.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    _check_spec_stable(spec)
    p = spec.p
    if k >= p:
        return SubprocessStability(value=_density_extremes(spec, grid_size)[1], exact=True)
    if math.comb(p, k) > cap:
        return SubprocessStability(value=_density_extremes(spec, grid_size)[1], exact=False)

    thetas = frequency_grid(grid_size)
    best = -math.inf
    if k == 1:
        for _, f in _density_chunks(spec, thetas):
            diag = np.diagonal(f, axis1=1, axis2=2).real
            best = max(best, float(diag.max()))
        return SubprocessStability(value=best, exact=True)
    if k == 2:
        rows, cols = np.triu_indices(p, 1)
        for _, f in _density_chunks(spec, thetas):
            best = max(best, float(_pair_max_eigvals(f, rows, cols).max()))
        return SubprocessStability(value=best, exact=True)

    subsets = np.array(list(itertools.combinations(range(p), k)))
    for _, f in _density_chunks(spec, thetas):
        for start in range(0, len(subsets), 512):
            sub = subsets[start : start + 512]
            blocks = f[:, sub[:, :, None], sub[:, None, :]]
            w = hermitian_eigvals(blocks)
            best = max(best, float(w[..., -1].max()))
    return SubprocessStability(value=best, exact=True)


# ---------------------------------------------------------------------------
# Autocovariance
# ---------------------------------------------------------------------------


def _stationary_companion_cov(comp: np.ndarray, sig: np.ndarray) -> np.ndarray:
    """Fixed point of S -> comp S comp' + sig, accelerated by squaring.

    Partial sums double each step, so the geometric tail is exhausted after
    a handful of iterations for any radius below one.
    """
    s = sig.copy()
    m = comp.copy()
    for _ in range(64):
        inc = m @ s @ m.T
        s = s + inc
        s = (s + s.T) / 2.0
        if float(np.max(np.abs(inc))) <= _LYAPUNOV_TOL:
            break
        m = m @ m
    resid = float(np.max(np.abs(s - comp @ s @ comp.T - sig)))
    # relative to the solution scale: highly non-normal transitions near the
    # stability boundary produce huge stationary covariances whose float64
    # rounding floor sits far above any fixed absolute threshold
    if resid > _LYAPUNOV_RESIDUAL * max(1.0, float(np.max(np.abs(s)))):
        raise RuntimeError(f"stationary covariance iteration did not converge (residual {resid:.3e})")
    return s


def var_autocovariance(poly: VarPolynomial, sigma_eps: np.ndarray, max_lag: int) -> list[np.ndarray]:
    """Autocovariances Gamma(0..max_lag) of a stable VAR via companion form."""
    if max_lag < 0:
        raise ValueError("max_lag must be >= 0")
    sigma = _check_sigma(sigma_eps)
    if sigma.shape[0] != poly.p:
        raise ValueError("sigma dimension does not match polynomial")
    check = is_stable(poly)
    if not check.stable:
        raise ValueError(f"polynomial is unstable (radius {check.spectral_radius:.4f})")
    p, d = poly.p, poly.d
    comp = companion_matrix(poly)
    sig = np.zeros_like(comp)
    sig[:p, :p] = sigma
    cur = _stationary_companion_cov(comp, sig)
    gammas = [(cur[:p, :p] + cur[:p, :p].T) / 2.0]
    for _ in range(max_lag):
        cur = cur @ comp.T
        gammas.append(cur[:p, :p].copy())
    return gammas


def arma_autocovariance(spec: ArmaSpec, max_lag: int, grid_size: int = 8192) -> list[np.ndarray]:
    """Autocovariances by quadrature of the spectral density.

    The rectangle rule on the periodic grid is spectrally accurate for the
    smooth densities of stable ARMA processes.
    """
    if max_lag < 0:
        raise ValueError("max_lag must be >= 0")
    _check_spec_stable(spec)
    thetas = frequency_grid(grid_size)
    p = spec.p
    acc = np.zeros((max_lag + 1, p, p), dtype=complex)
    dtheta = TWO_PI / grid_size
    for block, f in _density_chunks(spec, thetas):
        for h in range(max_lag + 1):
            weights = np.exp(1j * h * block)
            acc[h] += np.tensordot(weights, f, axes=(0, 0)) * dtheta
    out = [np.real(acc[h]) for h in range(max_lag + 1)]
    out[0] = (out[0] + out[0].T) / 2.0
    return out


def contemporaneous_cov(spec: ArmaSpec) -> np.ndarray:
    """Gamma(0) of a stationary spec, exact where a closed form exists."""
    if spec.ar is None and spec.ma is None:
        return spec.sigma_eps.copy()
    if spec.ma is None:
        return var_autocovariance(spec.ar, spec.sigma_eps, 0)[0]
    if spec.ar is None:
        acc = spec.sigma_eps.copy()
        for b in spec.ma.coeffs:
            acc = acc + b @ spec.sigma_eps @ b.T
        return acc
    return arma_autocovariance(spec, 0)[0]


def block_toeplitz_cov(gammas: list[np.ndarray], n: int) -> np.ndarray:
    """Covariance of n stacked consecutive observations, block (r,s) = Gamma(r-s)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if len(gammas) < n:
        raise ValueError(f"need autocovariances up to lag {n - 1}, got {len(gammas) - 1}")
    g = [np.asarray(m, dtype=float) for m in gammas]
    g[0] = (g[0] + g[0].T) / 2.0
    p = g[0].shape[0]
    out = np.zeros((n * p, n * p))
    for r in range(n):
        for s in range(n):
            blk = g[r - s] if r >= s else g[s - r].T
            out[r * p : (r + 1) * p, s * p : (s + 1) * p] = blk
    return out


# ---------------------------------------------------------------------------
# Export helpers
# ---------------------------------------------------------------------------


def spectrum_rows(spec: ArmaSpec, grid_size: int = DEFAULT_GRID) -> Iterator[tuple[float, int, float]]:
    """Rows (theta, eigenvalue index, eigenvalue) for CSV export."""
    _check_spec_stable(spec)
    thetas = frequency_grid(grid_size)
    for block, f in _density_chunks(spec, thetas):
        w = hermitian_eigvals(f)
        for i, theta in enumerate(block):
            for idx in range(w.shape[-1]):
                yield float(theta), idx, float(w[i, idx])
