"""
Test suite for the numerical experiments.

@date: 18.10.2026
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Any, ClassVar

import numpy as np
import numpy.typing as npt
import pytest
from scipy import stats
from invbinom import (
    EngineConfig,
    ExactEstimator,
    FixedEstimator,
    IbsEstimator,
    NoExactLikelihood,
    OptimizerConfig,
    fixed_bias_exact,
    fixed_variance_exact,
)
from invbinom.analysis import (
    COVERAGE_LEVELS,
    CurveTable,
    allocation_gain_study,
    bias_variance_curves,
    calibration_experiment,
    coverage,
    default_p_grid,
    early_stop_study,
    estimator_rmse_study,
    fixed_bias_monte_carlo,
    fixed_curves_monte_carlo,
    info_bound_table,
    kl_and_cross_entropy,
    master_curve_table,
    psychometric_trial_probabilities,
    recover_parameters,
    rmse_sweep,
    summarize_recovery,
)
from invbinom.models import CategoricalModel, ChangeLocModel, OrientationModel, ParameterSpace, SimulatorModel
from invbinom.models.changeloc import BASELINE_THETA as CHANGELOC_BASELINE
from invbinom.models.orientation import BASELINE_THETA

START = ((0.0, 0.3, 0.05),)


class CoinModel(SimulatorModel):
    name: ClassVar[str] = "coin"
    default_trials: ClassVar[int] = 5

    def parameter_space(self) -> ParameterSpace:
        return ParameterSpace(())

    def response_space(self, stimulus: Any) -> tuple[int, ...]:
        return (0, 1)

    def sample_stimuli(self, n: int, rng: np.random.Generator) -> npt.NDArray[np.float64]:
        return np.zeros(n)

    def simulate(
        self, stimuli: npt.NDArray[Any], theta: npt.NDArray[np.float64], rng: np.random.Generator
    ) -> npt.NDArray[np.int64]:
        return (rng.random(len(stimuli)) < 0.5).astype(np.int64)


def test_curve_table_contract() -> None:
    with pytest.raises(ValueError):
        CurveTable("empty", {})
    with pytest.raises(ValueError):
        CurveTable("ragged", {"a": [1, 2], "b": [1]})
    with pytest.raises(ValueError):
        CurveTable("mc", {"a": [1]}, {"monte_carlo": True})


def test_curve_table_csv(tmp_path: Path) -> None:
    table = CurveTable("demo", {"x": [0.5, 1.0], "y": [np.float64(2.0), 3]}, {"seed": 7})
    assert len(table) == 2
    assert table.axis == "x"
    assert list(table.rows())[1] == {"x": 1.0, "y": 3}
    sidecar = table.to_csv(tmp_path / "demo.csv")
    assert sidecar == tmp_path / "demo.meta.json"
    with open(tmp_path / "demo.csv", newline="") as stream:
        rows = list(csv.reader(stream))
    assert rows == [["x", "y"], ["0.5", "2.0"], ["1.0", "3"]]
    meta = json.loads(sidecar.read_text())
    assert meta["seed"] == 7
    assert meta["rows"] == 2


def test_bias_variance_curves() -> None:
    p = default_p_grid(20)
    table = bias_variance_curves(p, m_list=(10,), r_list=(1, 4))
    assert table.axis == "p"
    assert np.all(table.column("ibs_bias") == 0.0)
    np.testing.assert_allclose(table.column("ibs_std_R4"), table.column("ibs_std_R1") / 2)
    np.testing.assert_allclose(table.column("ibs_samples_R1"), 1 / p)
    assert table.column("ibs_std_R1")[-1] == 0.0
    assert table.column("fixed_bias_M10")[0] == pytest.approx(fixed_bias_exact(0.01, 10))
    assert table.column("fixed_std_M10")[5] == pytest.approx(math.sqrt(fixed_variance_exact(p[5], 10)))


def test_bias_variance_curves_domain() -> None:
    with pytest.raises(ValueError):
        bias_variance_curves([0.0, 0.5])


def test_master_curve_table() -> None:
    lam = np.linspace(0.1, 10.0, 30)
    table = master_curve_table(lam)
    assert np.all(np.abs(table.column("master") - table.column("fixed_bias_M100")) < 0.1)
    with pytest.raises(ValueError):
        master_curve_table([200.0])


def test_info_bound_table() -> None:
    table = info_bound_table(np.array([1e-6, 0.1, 0.5, 0.99]))
    ratio = table.column("ratio")
    assert np.all(ratio >= 1.0)
    assert ratio[0] == pytest.approx(math.pi / math.sqrt(6), rel=1e-4)
    assert ratio[-1] == pytest.approx(1.0, abs=0.01)
    with pytest.raises(ValueError):
        info_bound_table([1.0])


@pytest.mark.parametrize("p, big_m", [(0.01, 10), (0.1, 10), (0.5, 100)])
def test_fixed_bias_monte_carlo(p: float, big_m: int) -> None:
    result = fixed_bias_monte_carlo(p, big_m, runs=100_000, seed=3)
    assert result.bias == pytest.approx(fixed_bias_exact(p, big_m), abs=4 * result.std_error)
    assert result.std == pytest.approx(math.sqrt(fixed_variance_exact(p, big_m)), rel=0.02)


def test_fixed_curves_monte_carlo() -> None:
    p = np.array([0.05, 0.3, 0.9])
    table = fixed_curves_monte_carlo(p, m_list=(10,), runs=20_000, seed=1)
    assert table.metadata["monte_carlo"]
    assert table.column("replications").tolist() == [20_000] * 3
    exact = [fixed_bias_exact(q, 10) for q in p]
    assert np.all(np.abs(table.column("fixed_bias_M10") - exact) < 5 * table.column("fixed_bias_se_M10"))


def test_psychometric_trial_probabilities() -> None:
    p = psychometric_trial_probabilities(n_trials=200, seed=2)
    assert p.shape == (200,)
    assert np.all((p > 0) & (p <= 1))
    assert np.all(p >= BASELINE_THETA.gamma / 2)


def test_estimator_rmse_study() -> None:
    pool = psychometric_trial_probabilities(n_trials=100, seed=0)
    table = estimator_rmse_study(pool, n_list=(10,), repeats=(1, 4), samples=(1, 100), runs=400, seed=5)
    rows = {(r["method"], r["setting"]): r for r in table.rows()}
    assert set(rows) == {("ibs", 1), ("ibs", 4), ("fixed", 1), ("fixed", 100)}
    ibs = rows[("ibs", 1)]
    assert abs(ibs["bias"]) < 4 * ibs["rmse"] / math.sqrt(400)
    assert rows[("ibs", 4)]["rmse"] < ibs["rmse"]
    assert rows[("ibs", 4)]["samples_per_trial"] == pytest.approx(4 * ibs["samples_per_trial"], rel=0.1)
    assert rows[("fixed", 1)]["samples_per_trial"] == 1.0
    assert rows[("fixed", 1)]["bias"] > 0


def test_allocation_gain_study() -> None:
    summary = allocation_gain_study(n_trials=50, n_draws=20, seed=0)
    assert summary.gains.shape == (20,)
    assert np.all(summary.gains >= 1.0 - 1e-12)
    assert np.all(summary.rounded <= summary.gains * (1 + 1e-12))
    low, high = summary.iqr
    assert low <= summary.median <= high
    payload = summary.to_dict()
    assert payload["draws"] == 20
    again = allocation_gain_study(n_trials=50, n_draws=20, seed=0)
    np.testing.assert_array_equal(again.gains, summary.gains)


def test_kl_of_categoricals() -> None:
    source = CategoricalModel([0.5, 0.25, 0.25])
    target = CategoricalModel([0.2, 0.3, 0.5])
    estimate = kl_and_cross_entropy(source, target, 20_000, EngineConfig(master_seed=3)).unwrap()
    exact_kl = source.cross_entropy(target) - source.entropy()
    assert estimate.kl.value == pytest.approx(exact_kl, abs=4 * estimate.kl.std_error)
    assert estimate.entropy.value == pytest.approx(source.entropy(), abs=4 * estimate.entropy.std_error)


def test_coverage() -> None:
    assert coverage([-2.0, 0.5, 1.0, 3.0], 1.0) == 0.5
    assert COVERAGE_LEVELS == (1.0, 1.96, 2.58)


def test_calibration_experiment() -> None:
    """
    With the exact variance, about 95% of the z-scores fall within 1.96.
    """
    model = OrientationModel()
    report = calibration_experiment(
        model, BASELINE_THETA.as_vector(), n_datasets=200, config=EngineConfig(master_seed=1), n_trials=100
    ).unwrap()
    assert report.z_exact.shape == (200,)
    assert 0.88 <= report.coverage_exact(1.96) <= 1.0
    assert abs(report.mean_z) < 0.3
    assert abs(float(np.mean(report.sample_z))) < 0.3
    payload = report.to_dict()
    assert set(payload["coverage_estimated"]) == {"1.0", "1.96", "2.58"}
    assert len(report.to_table()) == 200


def test_calibration_is_worker_invariant() -> None:
    model = OrientationModel()
    theta = BASELINE_THETA.as_vector()
    config = EngineConfig(repeats=2, master_seed=4)
    serial = calibration_experiment(model, theta, 12, config, n_trials=50).unwrap()
    threaded = calibration_experiment(model, theta, 12, config, n_trials=50, workers=3).unwrap()
    np.testing.assert_array_equal(serial.z_estimated, threaded.z_estimated)


def test_calibration_needs_exact_likelihood() -> None:
    result = calibration_experiment(CoinModel(), (), n_datasets=3)
    assert isinstance(result.error, NoExactLikelihood)


def test_early_stop_study() -> None:
    model = OrientationModel()
    theta = BASELINE_THETA.as_vector()
    data = model.generate(100, theta, seed=6)
    free = early_stop_study(model, data, theta, threshold=-1e9, runs=200, seed=1).unwrap()
    assert free.stopped_fraction == 0.0
    assert abs(free.bias) < 4 * free.std_error
    threshold = free.exact + 5.0
    stopped = early_stop_study(model, data, theta, threshold=threshold, runs=50, seed=1).unwrap()
    assert stopped.stopped_fraction > 0.5
    assert np.all(stopped.estimates >= threshold)
    assert stopped.to_dict()["runs"] == 50


def test_chance_threshold_keeps_good_fits_unbiased() -> None:
    """
    At a well-fitting theta the chance threshold -N log 2 lies far below
    the exact log-likelihood: no run stops and every estimate equals the
    one drawn without a threshold.
    """
    model = OrientationModel()
    theta = BASELINE_THETA.as_vector()
    data = model.generate(300, theta, seed=7)
    threshold = -300 * math.log(2.0)
    bounded = early_stop_study(model, data, theta, threshold=threshold, runs=200, seed=3).unwrap()
    free = early_stop_study(model, data, theta, threshold=-1e9, runs=200, seed=3).unwrap()
    assert bounded.exact - threshold > 20
    assert bounded.stopped_fraction == 0.0
    np.testing.assert_array_equal(bounded.estimates, free.estimates)
    assert abs(bounded.mean - free.mean) < 0.05
    assert abs(bounded.bias) < 4 * bounded.std_error


def test_chance_threshold_stops_bad_fits() -> None:
    """
    A theta predicting the wrong response on a quarter of the trials is
    worse than chance: every run stops and returns exactly the threshold.
    """
    model = OrientationModel()
    data = model.generate(300, BASELINE_THETA.as_vector(), seed=7)
    adversarial = np.array([math.log(0.2), 1.9, 0.01])
    threshold = -300 * math.log(2.0)
    summary = early_stop_study(model, data, adversarial, threshold=threshold, runs=50, seed=3).unwrap()
    assert summary.exact < threshold
    assert summary.stopped_fraction == 1.0
    assert np.all(summary.estimates == threshold)


@pytest.fixture(scope="module")
def recovery() -> list:
    return recover_parameters(
        OrientationModel(),
        BASELINE_THETA.as_vector(),
        [IbsEstimator(), FixedEstimator(samples=5), ExactEstimator()],
        n_datasets=2,
        n_trials=100,
        optimizer=OptimizerConfig(starts=START, max_evaluations=30),
        seed=2,
    )


def test_recover_parameters(recovery: list) -> None:
    assert len(recovery) == 6
    assert [r.method for r in recovery[:3]] == ["ibs-R1", "fixed-M5", "exact"]
    assert all(r.theta_hat is not None and len(r.theta_hat) == 3 for r in recovery)
    assert all(not math.isnan(r.loglik_loss) for r in recovery)
    assert all(r.loglik_loss == 0.0 for r in recovery if r.method == "exact")
    fixed = [r for r in recovery if r.method == "fixed-M5"]
    assert all(r.samples_per_trial == 5.0 for r in fixed)


def test_summarize_recovery(recovery: list) -> None:
    table = summarize_recovery(recovery, ("eta", "mu", "gamma"), {"seed": 2})
    assert len(table) == 3
    assert table.column("replications").tolist() == [2, 2, 2]
    assert table.column("status").tolist() == ["ok", "ok", "ok"]
    assert "mu_rmse" in table.columns
    assert table.metadata["seed"] == 2


def test_failed_fits_are_recorded() -> None:
    records = recover_parameters(
        OrientationModel(),
        BASELINE_THETA.as_vector(),
        [IbsEstimator(per_trial_sample_cap=1)],
        n_datasets=1,
        n_trials=50,
        optimizer=OptimizerConfig(starts=START, max_evaluations=10),
    )
    assert records[0].theta_hat is None
    assert "sample cap" in records[0].status
    table = summarize_recovery(records, ("eta", "mu", "gamma"))
    assert table.column("status").tolist() == ["failed"]


def test_rmse_sweep(tmp_path: Path) -> None:
    table = rmse_sweep(
        OrientationModel(),
        BASELINE_THETA.as_vector(),
        [FixedEstimator(samples=3)],
        n_datasets=2,
        n_trials=50,
        optimizer=OptimizerConfig(starts=START, max_evaluations=20),
        seed=1,
        workers=2,
    )
    assert table.metadata["model"] == "orientation"
    assert table.metadata["methods"] == ["fixed-M3"]
    table.to_csv(tmp_path / "recovery.csv")
    assert (tmp_path / "recovery.meta.json").exists()


@pytest.mark.slow
def test_calibration_acceptance() -> None:
    """
    4000 datasets of 600 trials: the 1.96 interval covers 95% +- 1.5% of
    the z-scores for both variances, and the exact z-scores are centred
    with near-normal shape.
    """
    model = OrientationModel()
    report = calibration_experiment(
        model, BASELINE_THETA.as_vector(), 4000, EngineConfig(master_seed=0), workers=4
    ).unwrap()
    assert 0.935 <= report.coverage_exact(1.96) <= 0.965
    assert 0.935 <= report.coverage_estimated(1.96) <= 0.965
    assert abs(float(np.mean(report.z_exact))) < 0.05
    assert abs(float(stats.skew(report.z_exact))) < 0.3
    assert abs(float(stats.kurtosis(report.z_exact))) < 0.5


@pytest.mark.slow
def test_allocation_gain_acceptance() -> None:
    """
    Likelihoods uniform on (0, 1], 500 trials: median gain 1.584 with
    quartiles 1.375 and 2.090, and 1.567 once repeats are rounded up.
    """
    summary = allocation_gain_study(n_trials=500, n_draws=10_000, seed=0)
    low, high = summary.iqr
    assert summary.median == pytest.approx(1.584, abs=0.05)
    assert low == pytest.approx(1.375, abs=0.05)
    assert high == pytest.approx(2.090, abs=0.1)
    assert summary.rounded_median == pytest.approx(1.567, abs=0.05)
    assert summary.rounded_median <= summary.median


ORIENTATION_METHODS = (IbsEstimator(repeats=1), IbsEstimator(repeats=2), FixedEstimator(samples=10), ExactEstimator())


@pytest.fixture(scope="module")
def orientation_recovery() -> list:
    return recover_parameters(
        OrientationModel(),
        BASELINE_THETA.as_vector(),
        ORIENTATION_METHODS,
        n_datasets=20,
        optimizer=OptimizerConfig(starts=START, max_evaluations=300),
        seed=5,
        workers=4,
    )


def paired_errors(records: list, method: str, params: tuple[int, ...]) -> npt.NDArray[np.float64]:
    cell = sorted((r for r in records if r.method == method), key=lambda r: r.dataset)
    return np.array([sum(abs(r.theta_hat[j] - r.theta_true[j]) for j in params) for r in cell])


@pytest.mark.slow
def test_recovery_ordering_acceptance(orientation_recovery: list) -> None:
    """
    On 20 orientation datasets, IBS with one repeat recovers eta and gamma
    almost as well as the exact likelihood and better than 10 fixed samples
    per trial, dataset by dataset in at least 70% of the pairs.
    """
    assert all(r.theta_hat is not None for r in orientation_recovery)
    table = summarize_recovery(orientation_recovery, ("eta", "mu", "gamma"))
    rmse = {(row["method"], name): row[f"{name}_rmse"] for row in table.rows() for name in ("eta", "gamma")}
    for name in ("eta", "gamma"):
        assert rmse[("exact", name)] <= rmse[("ibs-R1", name)]
        assert rmse[("ibs-R1", name)] < rmse[("fixed-M10", name)]
    ibs = paired_errors(orientation_recovery, "ibs-R1", (0, 2))
    fixed = paired_errors(orientation_recovery, "fixed-M10", (0, 2))
    assert np.mean(ibs < fixed) >= 0.7


@pytest.mark.slow
def test_loglik_loss_acceptance(orientation_recovery: list) -> None:
    """
    IBS with two repeats lands within 2 nats of the exact maximum in
    median; 10 fixed samples per trial lose more.
    """
    table = summarize_recovery(orientation_recovery, ("eta", "mu", "gamma"))
    loss = dict(zip(table.column("method").tolist(), table.column("loss_median").tolist()))
    assert loss["exact"] == 0.0
    assert loss["ibs-R2"] < 2.0
    assert loss["fixed-M10"] > loss["ibs-R2"]


@pytest.mark.slow
def test_changeloc_fixed_bias_acceptance() -> None:
    """
    With 20 fixed samples per trial the change localization fits
    underestimate eta, a sign test rejecting a zero median at 5% over 20
    datasets; IBS fits have a smaller median absolute bias.
    """
    records = recover_parameters(
        ChangeLocModel(),
        CHANGELOC_BASELINE.as_vector(),
        [IbsEstimator(repeats=1), FixedEstimator(samples=20)],
        n_datasets=20,
        optimizer=OptimizerConfig(starts=((math.log(0.5), 0.1),), max_evaluations=200),
        seed=8,
        workers=4,
    )
    eta_bias = {
        method: np.array([r.theta_hat[0] - r.theta_true[0] for r in records if r.method == method])
        for method in ("ibs-R1", "fixed-M20")
    }
    fixed = eta_bias["fixed-M20"]
    assert fixed.size == 20
    assert np.median(fixed) < 0
    assert stats.binomtest(int(np.sum(fixed < 0)), fixed.size, 0.5, alternative="greater").pvalue < 0.05
    assert np.median(np.abs(eta_bias["ibs-R1"])) < np.median(np.abs(fixed))
