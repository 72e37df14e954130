import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given
from hypothesis import strategies as st

from tsreg.spectral import (
    ArmaSpec,
    StabilityReport,
    VarPolynomial,
    arma_autocovariance,
    block_toeplitz_cov,
    companion_matrix,
    contemporaneous_cov,
    eval_char_poly,
    frequency_grid,
    hermitian_eigvals,
    is_stable,
    mu_extremes,
    spectral_density,
    spectral_density_grid,
    stability_measures,
    subprocess_stability,
    var_autocovariance,
)

from _oracles import (
    ar1_autocov,
    density_from_autocov,
    naive_block_toeplitz,
    scalar_arma_density,
    subset_density_max,
)

TWO_PI = 2.0 * math.pi


def ar1(rho: float, sigma2: float = 1.0) -> ArmaSpec:
    return ArmaSpec(
        ar=VarPolynomial((np.array([[rho]]),)),
        ma=None,
        sigma_eps=np.array([[sigma2]]),
    )


def random_stable_var1(rng: np.random.Generator, p: int, radius: float = 0.8) -> VarPolynomial:
    a = rng.standard_normal((p, p))
    rho = max(abs(np.linalg.eigvals(a)))
    return VarPolynomial((a * (radius / max(rho, 1e-12)) * rng.uniform(0.3, 1.0),))


# ---------------------------------------------------------------------------
# Frozen scalar values
# ---------------------------------------------------------------------------


def test_ar1_density_extrema_frozen():
    # f(0) = 0.75 / (2 pi (1-0.5)^2),  f(pi) = 0.75 / (2 pi (1+0.5)^2)
    report = stability_measures(ar1(0.5, 0.75), 2048)
    assert report.m_upper == pytest.approx(0.477464829275686, abs=1e-12)
    assert report.m_lower == pytest.approx(0.05305164769729845, abs=1e-12)
    assert report.mu_min == pytest.approx(0.25, abs=1e-12)
    assert report.mu_max == pytest.approx(2.25, abs=1e-12)


def test_ar1_autocovariance_frozen():
    gammas = var_autocovariance(VarPolynomial((np.array([[0.5]]),)), np.array([[0.75]]), 2)
    vals = [float(g[0, 0]) for g in gammas]
    assert vals == pytest.approx([1.0, 0.5, 0.25], abs=1e-12)
    assert np.allclose(vals, ar1_autocov(0.5, 0.75, 2))


def test_companion_matrix_layout_and_radius():
    poly = VarPolynomial((np.array([[1.2]]), np.array([[-0.36]])))
    comp = companion_matrix(poly)
    assert comp.shape == (2, 2)
    assert comp[0, 0] == 1.2 and comp[0, 1] == -0.36 and comp[1, 0] == 1.0 and comp[1, 1] == 0.0
    check = is_stable(poly)
    # z^2 - 1.2 z + 0.36 = (z - 0.6)^2
    assert check.stable
    assert check.spectral_radius == pytest.approx(0.6, abs=1e-12)


def test_mu_extremes_scalar():
    lo, hi = mu_extremes(VarPolynomial((np.array([[0.5]]),)), 2048)
    assert lo == pytest.approx(0.25, abs=1e-12)
    assert hi == pytest.approx(2.25, abs=1e-12)


def test_mu_extremes_diagonal_var():
    lo, hi = mu_extremes(VarPolynomial((0.5 * np.eye(3),)), 1024)
    assert lo == pytest.approx(0.25, abs=1e-12)
    assert hi == pytest.approx(2.25, abs=1e-12)


def test_white_noise_measures():
    sigma = np.diag([2.0, 0.5])
    report = stability_measures(ArmaSpec(ar=None, ma=None, sigma_eps=sigma), 256)
    assert report.mu_min == 1.0 and report.mu_max == 1.0
    assert report.m_upper == pytest.approx(2.0 / TWO_PI, abs=1e-12)
    assert report.m_lower == pytest.approx(0.5 / TWO_PI, abs=1e-12)


def test_ma1_autocovariance_frozen():
    # x_t = eps_t - 0.8 eps_{t-1}: gamma0 = 1.64, gamma1 = -0.8, gamma2 = 0
    spec = ArmaSpec(ar=None, ma=VarPolynomial((np.array([[0.8]]),)), sigma_eps=np.array([[1.0]]))
    gammas = arma_autocovariance(spec, 2)
    assert gammas[0][0, 0] == pytest.approx(1.64, abs=1e-8)
    assert gammas[1][0, 0] == pytest.approx(-0.8, abs=1e-8)
    assert gammas[2][0, 0] == pytest.approx(0.0, abs=1e-8)
    assert contemporaneous_cov(spec)[0, 0] == pytest.approx(1.64, abs=1e-12)


def test_eval_char_poly_at_zero_is_identity():
    poly = VarPolynomial((np.array([[0.3, 0.1], [0.0, 0.2]]), np.eye(2) * 0.05))
    assert np.allclose(eval_char_poly(poly, 0.0), np.eye(2))
    z = 0.3 - 0.4j
    expected = np.eye(2) - poly.coeffs[0] * z - poly.coeffs[1] * z**2
    assert np.allclose(eval_char_poly(poly, z), expected)


# ---------------------------------------------------------------------------
# Cross-route checks against independent oracles
# ---------------------------------------------------------------------------


def test_scalar_arma_density_matches_oracle():
    spec = ArmaSpec(
        ar=VarPolynomial((np.array([[0.5]]),)),
        ma=VarPolynomial((np.array([[0.8]]), np.array([[-0.16]]))),
        sigma_eps=np.array([[2.0]]),
    )
    for theta in (0.0, 0.7, -2.1, math.pi / 3):
        got = spectral_density(spec, theta).value[0, 0].real
        want = scalar_arma_density([0.5], [0.8, -0.16], 2.0, theta)
        assert got == pytest.approx(want, rel=1e-12)


def test_var_density_matches_autocov_fourier_sum():
    a = np.array([[0.5, 0.2], [0.0, 0.4]])
    sigma = np.array([[1.0, 0.3], [0.3, 2.0]])
    spec = ArmaSpec(ar=VarPolynomial((a,)), ma=None, sigma_eps=sigma)
    gammas = var_autocovariance(spec.ar, sigma, 300)
    for theta in (0.0, 1.1, -0.6):
        want = density_from_autocov(gammas, theta)
        got = spectral_density(spec, theta).value
        assert np.allclose(got, want, atol=1e-10)


def test_var_autocovariance_matches_scipy_lyapunov():
    rng = np.random.default_rng(42)
    for _ in range(5):
        poly = random_stable_var1(rng, 4)
        sigma = np.eye(4)
        want = scipy.linalg.solve_discrete_lyapunov(poly.coeffs[0], sigma)
        got = var_autocovariance(poly, sigma, 0)[0]
        assert np.allclose(got, want, atol=1e-9)
        assert np.allclose(contemporaneous_cov(ArmaSpec(poly, None, sigma)), want, atol=1e-9)


def test_var2_autocovariance_matches_companion_lyapunov():
    # A VAR(2) solved through its own 2p x 2p companion embedding in scipy.
    a1 = np.array([[0.4, 0.1], [0.0, 0.3]])
    a2 = np.array([[0.2, 0.0], [0.05, 0.1]])
    sigma = np.array([[1.0, 0.2], [0.2, 1.5]])
    poly = VarPolynomial((a1, a2))
    comp = companion_matrix(poly)
    big_sigma = np.zeros((4, 4))
    big_sigma[:2, :2] = sigma
    full = scipy.linalg.solve_discrete_lyapunov(comp, big_sigma)
    gammas = var_autocovariance(poly, sigma, 1)
    assert np.allclose(gammas[0], full[:2, :2], atol=1e-9)
    # Cov(X_t, X_{t+1}) is the (lagged, current) block of the companion cov
    assert np.allclose(gammas[1], full[2:, :2], atol=1e-9)


def test_hermitian_eigvals_matches_complex_eigvalsh():
    rng = np.random.default_rng(7)
    for _ in range(10):
        x = rng.standard_normal((4, 4))
        y = rng.standard_normal((4, 4))
        h = (x + x.T) + 1j * (y - y.T)
        got = hermitian_eigvals(h[None])[0]
        want = np.linalg.eigvalsh(h)
        assert np.allclose(got, want, atol=1e-10)


def test_subprocess_stability_matches_bruteforce():
    rng = np.random.default_rng(3)
    poly = random_stable_var1(rng, 5)
    sigma = np.diag(rng.uniform(0.5, 2.0, size=5))
    spec = ArmaSpec(ar=poly, ma=None, sigma_eps=sigma)
    _, density = spectral_density_grid(spec, 128)
    for k in (1, 2, 3):
        got = subprocess_stability(spec, k, 128)
        want = subset_density_max(density, k)
        assert got.exact
        assert got.value == pytest.approx(want, rel=1e-10)


def test_subprocess_stability_monotone_and_caps_at_full():
    spec = ArmaSpec(
        ar=VarPolynomial((np.array([[0.5, 0.2, 0.0], [0.0, 0.4, 0.1], [0.1, 0.0, 0.3]]),)),
        ma=None,
        sigma_eps=np.eye(3),
    )
    values = [subprocess_stability(spec, k, 256).value for k in (1, 2, 3)]
    assert values[0] <= values[1] + 1e-12
    assert values[1] <= values[2] + 1e-12
    report = stability_measures(spec, 256)
    assert values[2] == pytest.approx(report.m_upper, rel=1e-12)


def test_block_toeplitz_matches_naive():
    poly = VarPolynomial((np.array([[0.5, 0.1], [0.0, 0.6]]),))
    sigma = np.eye(2)
    gammas = var_autocovariance(poly, sigma, 3)
    got = block_toeplitz_cov(gammas, 4)
    want = naive_block_toeplitz(gammas, 4)
    assert np.allclose(got, want, atol=0)
    assert np.allclose(got, got.T, atol=1e-12)
    assert np.linalg.eigvalsh(got)[0] > 0


# ---------------------------------------------------------------------------
# Grid and report invariants
# ---------------------------------------------------------------------------


def test_frequency_grid_nests():
    coarse = frequency_grid(64)
    fine = frequency_grid(128)
    assert coarse.size == 64 and fine.size == 128
    assert coarse[0] == -math.pi and fine[0] == -math.pi
    assert set(np.round(coarse, 12)).issubset(set(np.round(fine, 12)))
    with pytest.raises(ValueError):
        frequency_grid(32)


@given(st.integers(0, 2**32 - 1))
def test_grid_refinement_only_widens_extrema(seed):
    rng = np.random.default_rng(seed)
    spec = ArmaSpec(ar=random_stable_var1(rng, 2), ma=None, sigma_eps=np.eye(2))
    coarse = stability_measures(spec, 64)
    fine = stability_measures(spec, 128)
    assert fine.m_upper >= coarse.m_upper - 1e-12
    assert fine.m_lower <= coarse.m_lower + 1e-12
    assert fine.mu_max >= coarse.mu_max - 1e-12
    assert fine.mu_min <= coarse.mu_min + 1e-12


@given(st.integers(0, 2**32 - 1))
def test_density_is_hermitian_psd(seed):
    rng = np.random.default_rng(seed)
    spec = ArmaSpec(ar=random_stable_var1(rng, 3), ma=None, sigma_eps=np.eye(3))
    theta = float(rng.uniform(-math.pi, math.pi))
    value = spectral_density(spec, theta).value
    assert np.allclose(value, value.conj().T, atol=1e-10)
    assert np.linalg.eigvalsh(value)[0] >= -1e-10


def test_stability_report_roundtrip():
    report = stability_measures(ar1(0.4), 256, k_values=(1,))
    again = StabilityReport.from_dict(report.to_dict())
    assert again == report
    with pytest.raises(ValueError):
        StabilityReport(
            m_upper=0.1, m_lower=0.2, mu_min=1.0, mu_max=2.0, grid_size=64, k_sparse=None
        )


def test_is_stable_margin():
    poly = VarPolynomial((np.array([[0.9]]),))
    assert is_stable(poly).stable
    assert not is_stable(poly, margin=0.2).stable
    with pytest.raises(ValueError):
        is_stable(poly, margin=1.0)


def test_unstable_spec_rejected_at_density():
    spec = ArmaSpec(ar=VarPolynomial((np.array([[1.05]]),)), ma=None, sigma_eps=np.array([[1.0]]))
    with pytest.raises(ValueError):
        spectral_density(spec, 0.0)


def test_varpoly_scale():
    poly = VarPolynomial((np.array([[0.5]]), np.array([[0.2]])))
    scaled = poly.scale(0.5)
    assert scaled.coeffs[0][0, 0] == 0.25
    assert scaled.coeffs[1][0, 0] == pytest.approx(0.1)
    assert poly.coeffs[0][0, 0] == 0.5  # original untouched


def test_stability_measures_k_values():
    spec = ar1(0.5, 0.75)
    report = stability_measures(spec, 512, k_values=(1,))
    assert report.k_sparse is not None
    assert report.k_sparse[1] == pytest.approx(report.m_upper, rel=1e-12)
