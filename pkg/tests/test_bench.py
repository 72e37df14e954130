import json

import numpy as np
import pytest

from tsreg.bench import (
    ExperimentConfig,
    run_dependence_sweep,
    run_experiment,
    run_scaling_experiment,
    run_var_benchmark,
    scaling_scenario,
)
from tsreg.processes import RngSeed
from tsreg.results import CSV_HEADER, ExperimentResult, emit, read_csv


def tiny_var_config(**overrides):
    base = dict(
        experiment="var-tables",
        dimensions=[4],
        sample_sizes=[40],
        rhos=[0.5],
        families=["toeplitz"],
        replicates=2,
        seed=11,
        density=0.25,
        snr=1.5,
        path_points=12,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


# ---------------------------------------------------------------------------
# Config plumbing
# ---------------------------------------------------------------------------


def test_config_rejects_unknown_field():
    with pytest.raises(ValueError, match="not_a_field"):
        ExperimentConfig.from_dict({"experiment": "scaling", "not_a_field": 1})
    with pytest.raises(ValueError, match="experiment"):
        ExperimentConfig.from_dict({"replicates": 5})


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(experiment="nope")
    with pytest.raises(ValueError):
        ExperimentConfig(experiment="scaling", replicates=0)
    with pytest.raises(ValueError):
        ExperimentConfig(experiment="scaling", format="parquet")


def test_config_from_dict_applies_defaults():
    cfg = ExperimentConfig.from_dict({"experiment": "dependence"})
    assert cfg.replicates == 50
    assert cfg.gamma_grid == [0.0, 0.3, 0.6, 0.9]
    assert cfg.workers == 0


# ---------------------------------------------------------------------------
# Scaling experiment
# ---------------------------------------------------------------------------


def test_scaling_scenario_shape():
    scn = scaling_scenario(16, 1.2, RngSeed(0, "scn"))
    k = int(np.count_nonzero(scn.beta_star))
    assert k == 4  # round(sqrt(16))
    mags = np.abs(scn.beta_star[scn.beta_star != 0])
    assert np.allclose(mags, 0.5)  # 1/sqrt(k)
    assert np.linalg.norm(scn.beta_star) == pytest.approx(1.0)


def test_run_scaling_experiment_rows():
    cfg = ExperimentConfig(
        experiment="scaling", dimensions=[16], sample_sizes=[60, 120], replicates=3, seed=5
    )
    result = run_scaling_experiment(cfg)
    errs = result.values("l2_error", setting="p=16,n=60")
    assert len(errs) == 3 and all(e > 0 for e in errs)
    rescaled = result.values("n_rescaled", setting="p=16,n=120")
    assert rescaled[0] == pytest.approx(120 / (4 * np.log(16)))
    # same config, same rows
    again = run_scaling_experiment(cfg)
    assert [r for r in again.sorted_rows()] == [r for r in result.sorted_rows()]


def test_run_scaling_more_data_helps():
    cfg = ExperimentConfig(
        experiment="scaling", dimensions=[16], sample_sizes=[50, 400], replicates=5, seed=2
    )
    result = run_scaling_experiment(cfg)
    small = np.median(result.values("l2_error", setting="p=16,n=50"))
    large = np.median(result.values("l2_error", setting="p=16,n=400"))
    assert large < small


# ---------------------------------------------------------------------------
# VAR benchmark
# ---------------------------------------------------------------------------


def test_run_var_benchmark_covers_methods():
    result = run_var_benchmark(tiny_var_config())
    setting = "p=4,T=40,family=toeplitz,rho=0.5"
    assert result.settings() == [setting]
    for method in ("ols", "ridge", "l1ls", "l1ll", "l1ll-oracle"):
        errs = result.values("relative_error", setting=setting, method=method)
        assert len(errs) == 2, method
        assert all(np.isfinite(e) and e >= 0 for e in errs)
    for method in ("l1ls", "l1ll", "l1ll-oracle"):
        scores = result.values("auroc", setting=setting, method=method)
        assert len(scores) == 2
        assert all(0.0 <= s <= 1.0 for s in scores)
    # OLS and ridge do not get a path-based score
    assert result.values("auroc", method="ols") == []
    assert result.values("auroc", method="ridge") == []


def test_run_var_benchmark_deterministic():
    a = run_var_benchmark(tiny_var_config())
    b = run_var_benchmark(tiny_var_config())
    assert a.sorted_rows() == b.sorted_rows()


def test_worker_pool_matches_serial():
    serial = run_var_benchmark(tiny_var_config())
    parallel = run_var_benchmark(tiny_var_config(workers=2))
    assert serial.sorted_rows() == parallel.sorted_rows()


# ---------------------------------------------------------------------------
# Dependence sweep
# ---------------------------------------------------------------------------


def test_run_dependence_sweep_rows():
    cfg = ExperimentConfig(
        experiment="dependence",
        dimensions=[12],
        sample_sizes=[80],
        replicates=2,
        seed=3,
        gamma_grid=[0.0, 0.6],
        alpha_grid=[0.3],
    )
    result = run_dependence_sweep(cfg)
    settings = result.settings()
    assert "kind=triangular,p=12,level=0.0,n=80" in settings
    assert "kind=triangular,p=12,level=0.6,n=80" in settings
    assert "kind=ar2,p=12,level=0.3,n=80" in settings
    for s in settings:
        assert len(result.values("l2_error", setting=s)) == 2


def test_run_experiment_dispatch():
    cfg = ExperimentConfig(
        experiment="dependence",
        dimensions=[8],
        sample_sizes=[40],
        replicates=1,
        seed=0,
        gamma_grid=[0.0],
        alpha_grid=[0.2],
    )
    result = run_experiment(cfg)
    assert all(r.experiment == "dependence" for r in result.rows)


# ---------------------------------------------------------------------------
# Emission
# ---------------------------------------------------------------------------


def test_emit_header_only_when_empty(tmp_path):
    path = tmp_path / "empty.csv"
    emit(ExperimentResult(), "csv", path)
    assert path.read_bytes() == b"experiment,setting,method,replicate,metric,value\r\n"


def test_emit_roundtrip_and_determinism(tmp_path):
    result = ExperimentResult()
    result.add("e", "s=1", "m", 1, "metric", 0.123456789123456789)
    result.add("e", "s=1", "m", 0, "metric", -2.0)
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    emit(result, "csv", p1)
    emit(result, "csv", p2)
    assert p1.read_bytes() == p2.read_bytes()
    back = read_csv(p1)
    assert back.sorted_rows() == result.sorted_rows()
    jpath = tmp_path / "a.json"
    emit(result, "json", jpath)
    payload = json.loads(jpath.read_text())
    assert isinstance(payload, list) and len(payload) == 2
    assert payload[0]["replicate"] == 0
    with pytest.raises(ValueError):
        emit(result, "parquet", tmp_path / "c.x")


def test_read_csv_rejects_foreign_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b,c\n1,2,3\n")
    with pytest.raises(ValueError):
        read_csv(path)
    assert CSV_HEADER == ("experiment", "setting", "method", "replicate", "metric", "value")
