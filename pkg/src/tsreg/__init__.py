"""Sparse estimation for high-dimensional Gaussian time series.

Spectral stability measures for stationary ARMA/VAR processes, an l1
coordinate-descent solver with KKT certificates, penalized VAR estimators
(least squares and innovation-weighted log-likelihood), covariance hard
thresholding, Monte-Carlo concentration diagnostics, and a benchmark CLI.
"""
from .spectral import (
    ArmaSpec,
    HermitianSpectrum,
    StabilityCheck,
    StabilityReport,
    SubprocessStability,
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
    spectrum_rows,
    stability_measures,
    subprocess_stability,
    var_autocovariance,
)
from .processes import (
    ErrorCovFamily,
    ProcessSpec,
    RegressionScenario,
    RngSeed,
    SnrInfeasibleError,
    build_error_cov,
    gen_sparse_transition,
    read_dataset,
    repeated_ar2_spec,
    simulate,
    simulate_regression,
    spec_from_dict,
    spec_to_dict,
    triangular_band_var_spec,
    write_dataset,
)
from .solver import (
    DenseGram,
    KroneckerGram,
    L1Fit,
    LambdaRule,
    QuadraticL1Problem,
    kkt_residual,
    lambda_grid,
    lasso_path,
    lasso_regression,
    soft_threshold,
    solve,
    threshold_estimate,
)
from .var import (
    METHOD_L1_LL,
    METHOD_L1_LL_ORACLE,
    METHOD_L1_LS,
    METHOD_OLS,
    METHOD_RIDGE,
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
from .covthresh import (
    ThresholdedCov,
    consistency_curve,
    hard_threshold,
    median_curve,
    sample_cov,
    threshold_rule,
)
from .diagnostics import (
    CrossDeviationReport,
    DeviationSample,
    GramDeviationReport,
    RateAuditReport,
    ReCertificate,
    SandwichReport,
    certify_re,
    cross_deviation_mc,
    gram_deviation_mc,
    rate_audit,
    toeplitz_sandwich_check,
)
from .results import CSV_HEADER, ExperimentResult, ResultRow, emit, read_csv
from .bench import (
    ExperimentConfig,
    run_dependence_sweep,
    run_experiment,
    run_scaling_experiment,
    run_var_benchmark,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
