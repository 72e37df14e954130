import numpy as np
import pytest

from tsreg.processes import ProcessSpec, RngSeed, gen_sparse_transition, simulate
from tsreg.spectral import ArmaSpec, VarPolynomial
from tsreg.var import (
    METHOD_L1_LL,
    METHOD_L1_LS,
    METHOD_OLS,
    SelectionMetrics,
    VarDesign,
    VarEstimate,
    auroc,
    build_design,
    coefficient_path,
    default_lambda,
    estimate_sigma_from_residuals,
    fit_l1_ll,
    fit_l1_ll_plugin,
    fit_l1_ls,
    fit_ols,
    fit_ridge,
    forecast_one_step,
    relative_error,
    residuals,
    support_vector,
)

from _oracles import auroc_pairwise


def simulated_design(p=5, T=400, seed=0, density=0.2, snr=1.8, d=1):
    poly = gen_sparse_transition(p, density, snr, RngSeed(seed, "design/A"))
    spec = ProcessSpec(ArmaSpec(ar=poly, ma=None, sigma_eps=np.eye(p)))
    data = simulate(spec, T + 1, RngSeed(seed, "design/path"))
    return build_design(data, d), poly


# ---------------------------------------------------------------------------
# Design construction
# ---------------------------------------------------------------------------


def test_build_design_alignment_frozen():
    data = np.array([[0.0, 1.0], [2.0, 3.0], [4.0, 5.0], [6.0, 7.0]])
    design = build_design(data, 2)
    assert design.n_samples == 2 and design.p == 2 and design.d == 2
    assert np.array_equal(design.response, data[2:])
    # row t: [x_{t-1} | x_{t-2}] blocks, most recent lag first
    assert np.array_equal(design.predictors[0], np.array([2.0, 3.0, 0.0, 1.0]))
    assert np.array_equal(design.predictors[1], np.array([4.0, 5.0, 2.0, 3.0]))


def test_build_design_validation():
    with pytest.raises(ValueError):
        build_design(np.zeros((3, 2)), 3)
    with pytest.raises(ValueError):
        build_design(np.zeros((3, 2)), 0)
    with pytest.raises(ValueError):
        VarDesign(response=np.zeros((4, 2)), predictors=np.zeros((3, 2)), d=1)


def test_default_lambda_formula():
    design, _ = simulated_design(p=4, T=100)
    expect = np.sqrt(np.log(1 * 4 * 4) / design.n_samples)
    assert default_lambda(design) == pytest.approx(expect)
    assert default_lambda(design, 2.5) == pytest.approx(2.5 * expect)


# ---------------------------------------------------------------------------
# Unpenalized / ridge baselines vs linear-algebra oracles
# ---------------------------------------------------------------------------


def test_fit_ols_matches_lstsq():
    design, _ = simulated_design(p=4, T=200, seed=3)
    est = fit_ols(design)
    b_direct, *_ = np.linalg.lstsq(design.predictors, design.response, rcond=None)
    a_direct = b_direct[:4].T
    assert np.allclose(est.coeffs.coeffs[0], a_direct, atol=1e-8)
    assert est.method == METHOD_OLS
    assert est.lam is None


def test_fit_ols_singular_raises():
    design = VarDesign(response=np.ones((2, 3)), predictors=np.ones((2, 3)), d=1)
    with pytest.raises(ValueError):
        fit_ols(design)


def test_fit_ridge_matches_closed_form():
    design, _ = simulated_design(p=3, T=80, seed=9)
    lam = 0.7
    est = fit_ridge(design, lam)
    n = design.n_samples
    s = design.predictors.T @ design.predictors / n
    xy = design.predictors.T @ design.response / n
    b = np.linalg.solve(s + lam * np.eye(3), xy)
    assert np.allclose(est.coeffs.coeffs[0], b.T, atol=1e-9)
    with pytest.raises(ValueError):
        fit_ridge(design, 0.0)


# ---------------------------------------------------------------------------
# Penalized estimators
# ---------------------------------------------------------------------------


def test_l1_ls_tiny_penalty_near_ols():
    design, _ = simulated_design(p=3, T=300, seed=4)
    est = fit_l1_ls(design, 1e-8)
    ols = fit_ols(design)
    assert np.allclose(est.coeffs.coeffs[0], ols.coeffs.coeffs[0], atol=1e-5)


def test_l1_ll_identity_weight_equals_ls():
    design, _ = simulated_design(p=4, T=150, seed=5)
    lam = default_lambda(design)
    ls = fit_l1_ls(design, lam)
    ll = fit_l1_ll(design, lam, np.eye(4))
    assert np.allclose(ls.stacked_vector(), ll.stacked_vector(), atol=1e-8)


def test_l1_ll_scaled_identity_rescales_penalty():
    design, _ = simulated_design(p=4, T=150, seed=6)
    lam = default_lambda(design)
    c = 2.5
    ll = fit_l1_ll(design, lam, c * np.eye(4))
    ls = fit_l1_ls(design, c * lam)
    assert np.allclose(ll.stacked_vector(), ls.stacked_vector(), atol=1e-8)


def test_l1_ll_requires_positive_definite_sigma():
    design, _ = simulated_design(p=3, T=60, seed=1)
    with pytest.raises(ValueError):
        fit_l1_ll(design, 0.1, np.zeros((3, 3)))


def test_plugin_pipeline_runs_and_labels():
    design, truth = simulated_design(p=5, T=400, seed=7)
    lam = default_lambda(design)
    est = fit_l1_ll_plugin(design, lam)
    assert est.method == METHOD_L1_LL
    assert est.sigma_used is not None
    assert relative_error(est, truth) < 1.0


def test_estimate_sigma_consistency():
    p = 3
    sigma = np.array([[1.0, 0.4, 0.0], [0.4, 1.0, 0.0], [0.0, 0.0, 0.5]])
    poly = VarPolynomial((0.4 * np.eye(p),))
    spec = ProcessSpec(ArmaSpec(ar=poly, ma=None, sigma_eps=sigma))
    data = simulate(spec, 20001, RngSeed(11, "sigma"))
    design = build_design(data, 1)
    truth_est = VarEstimate(coeffs=poly, method=METHOD_L1_LS, lam=0.0)
    sig_hat = estimate_sigma_from_residuals(design, truth_est)
    assert np.allclose(sig_hat, sigma, atol=0.05)
    res = residuals(design, truth_est)
    assert res.shape == (design.n_samples, p)


# ---------------------------------------------------------------------------
# Selection metrics
# ---------------------------------------------------------------------------


def test_auroc_perfect_and_inverted():
    # 4 coordinates, truth = {0, 1}; true coords enter at larger penalties
    path = [
        (1.0, np.array([1.0, 0.0, 0.0, 0.0])),
        (0.5, np.array([1.0, 0.5, 0.0, 0.0])),
        (0.25, np.array([1.0, 0.5, 0.2, 0.1])),
    ]
    assert auroc(path, np.array([0, 1])) == 1.0
    assert auroc(path, np.array([2, 3])) == 0.0


def test_auroc_all_tied_is_half():
    path = [(0.5, np.array([1.0, 1.0, 1.0, 1.0]))]
    assert auroc(path, np.array([0, 2])) == 0.5


def test_auroc_matches_pairwise_oracle_when_entries_distinct():
    rng = np.random.default_rng(15)
    q = 12
    lams = np.sort(rng.uniform(0.1, 1.0, size=q))[::-1]
    entry_at = rng.permutation(q)  # every coordinate enters at its own penalty
    path = []
    for i, lam in enumerate(lams):
        beta = np.where(entry_at <= i, 1.0 + np.arange(q), 0.0)
        path.append((float(lam), beta))
    truth = np.array([0, 3, 5, 7])
    scores = lams[entry_at]
    labels = np.zeros(q, dtype=bool)
    labels[truth] = True
    assert auroc(path, truth) == pytest.approx(auroc_pairwise(scores, labels), abs=1e-12)


def test_auroc_breaks_entry_ties_by_final_magnitude():
    # both coordinates enter together; the true one ends up larger
    path = [(0.5, np.array([0.2, 0.9, 0.0])), (0.25, np.array([0.2, 0.9, 0.0]))]
    assert auroc(path, np.array([1])) == 1.0
    assert auroc(path, np.array([0])) == 0.5  # beaten by the tied-entry coord


def test_auroc_from_real_path_recovers_strong_signal():
    design, truth = simulated_design(p=5, T=600, seed=12)
    path = coefficient_path(design, points=30)
    score = auroc(path, support_vector(truth))
    assert score > 0.9


def test_auroc_validation():
    path = [(0.5, np.zeros(4))]
    with pytest.raises(ValueError):
        auroc([], np.array([0]))
    with pytest.raises(ValueError):
        auroc(path, np.array([]))
    with pytest.raises(ValueError):
        auroc(path, np.array([0, 1, 2, 3]))


def test_relative_error_frozen():
    truth = VarPolynomial((np.array([[0.5]]),))
    est = VarPolynomial((np.array([[0.4]]),))
    assert relative_error(est, truth) == pytest.approx(0.2)
    with pytest.raises(ValueError):
        relative_error(est, VarPolynomial((np.zeros((1, 1)),)))


def test_support_vector_layout_frozen():
    a1 = np.array([[0.0, 0.5], [0.0, 0.0]])
    assert np.array_equal(support_vector(VarPolynomial((a1,))), np.array([1]))
    a1b = np.array([[0.0, 0.0], [0.7, 0.0]])
    assert np.array_equal(support_vector(VarPolynomial((a1b,))), np.array([2]))
    # d = 2: lag-2 entries sit in the second block of each output column
    a2 = np.array([[0.0, 0.0], [0.0, 0.3]])
    poly = VarPolynomial((np.zeros((2, 2)), a2))
    assert np.array_equal(support_vector(poly), np.array([7]))


def test_stacked_vector_agrees_with_support_layout():
    design, truth = simulated_design(p=3, T=200, seed=8)
    est = fit_l1_ls(design, 1e-8)
    vec = est.stacked_vector()
    a = est.coeffs.coeffs[0]
    # spot-check one coordinate: output column c, predictor a -> j = c*p + a
    assert vec[2 * 3 + 1] == a[2, 1]


def test_forecast_one_step_hand_case():
    a1 = np.array([[0.5, 0.0], [0.0, 0.25]])
    a2 = np.array([[0.1, 0.0], [0.0, 0.1]])
    est = VarEstimate(coeffs=VarPolynomial((a1, a2)), method=METHOD_L1_LS, lam=0.1)
    recent = np.array([[1.0, 2.0], [4.0, 8.0]])  # oldest first
    got = forecast_one_step(est, recent)
    # A1 @ newest + A2 @ previous
    assert np.allclose(got, a1 @ recent[1] + a2 @ recent[0])
    with pytest.raises(ValueError):
        forecast_one_step(est, np.array([[1.0, 2.0]]))


def test_var_estimate_roundtrip():
    design, _ = simulated_design(p=3, T=120, seed=2)
    est = fit_l1_ls(design, default_lambda(design))
    again = VarEstimate.from_dict(est.to_dict())
    assert np.array_equal(again.stacked_vector(), est.stacked_vector())
    assert again.method == est.method and again.lam == est.lam


def test_coefficient_path_starts_empty_and_grows():
    design, _ = simulated_design(p=4, T=300, seed=13)
    path = coefficient_path(design, points=15)
    assert len(path) == 15
    assert np.count_nonzero(path[0][1]) == 0
    assert np.count_nonzero(path[-1][1]) >= np.count_nonzero(path[0][1])
    lams = [lam for lam, _ in path]
    assert all(a > b for a, b in zip(lams, lams[1:]))


def test_selection_metrics_validation():
    SelectionMetrics(auroc=0.5, relative_error=0.1, method=METHOD_L1_LS)
    SelectionMetrics(auroc=None, relative_error=0.1, method=METHOD_OLS)
    with pytest.raises(ValueError):
        SelectionMetrics(auroc=1.2, relative_error=0.1, method=METHOD_L1_LS)
    with pytest.raises(ValueError):
        SelectionMetrics(auroc=0.5, relative_error=-0.1, method=METHOD_L1_LS)
