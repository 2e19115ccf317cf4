"""
Numerical experiments on the estimators: bias and variance curves,
calibration of the variance estimate, parameter recovery, allocation gains
and information bounds.

Every experiment is seeded; its cells draw from independent streams keyed
by the master seed and the cell coordinates, so tables are reproduced
exactly by re-running with the same seed, whatever the number of workers.

@date: 18.10.2026
"""

from __future__ import annotations

import csv
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Final, Iterator, NamedTuple, Sequence, TypeVar

import numpy as np
import numpy.typing as npt
from scipy import stats

from ._allocation import allocation_gain, rounded_allocation_gain
from ._checks import ContractViolation, DomainError, NoExactLikelihood, SampleCapReached
from ._engine import (
    EngineConfig,
    Estimator,
    ExactEstimator,
    InformationEstimate,
    derive_seed,
    estimate_cross_entropy,
    estimate_entropy,
    estimate_parallel,
    stream,
)
from ._estimators import (
    bias_master_curve,
    fixed_bias_exact,
    fixed_estimates,
    fixed_variance_exact,
    ibs_k_samples,
    ibs_values,
)
from ._iterators import collect_results
from ._optimizer import FitResult, OptimizerConfig, fit_mle, loglik_loss
from ._results import Err, Ok, Result
from ._special import dilog_array
from .dataset import Dataset
from .models import OrientationModel, SimulatorModel
from .models.orientation import BASELINE_THETA as ORIENTATION_BASELINE

logger = logging.getLogger(__name__)

COVERAGE_LEVELS: Final[tuple[float, ...]] = (1.0, 1.96, 2.58)

T = TypeVar("T")
U = TypeVar("U")


def _map(
    function: Callable[[T], U], items: Sequence[T], workers: int, thread_safe: bool = True
) -> list[U]:
    # results come back in the order of `items`
    if workers > 1 and thread_safe and len(items) > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            return list(executor.map(function, items))
    return [function(item) for item in items]


def default_p_grid(points: int = 50, p_min: float = 0.01) -> npt.NDArray[np.float64]:
    """
    Log-spaced grid of probabilities from `p_min` to 1.
    """
    return np.logspace(np.log10(p_min), 0.0, points)


@dataclass(frozen=True, eq=False)
class CurveTable:
    """
    A named table of equally long columns, written as CSV.

    Attributes
    ----------
    name: str
        Table name, used for default file names.
    columns: dict[str, Sequence]
        Column name to values, in output order. The first column is the
        axis of the table.
    metadata: dict[str, Any]
        Seeds, replication counts, config hash; written to the sidecar.
    """

    name: str
    columns: dict[str, Sequence[Any]]
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.columns:
            ContractViolation("CurveTable", "a table needs at least one column").throw()
        lengths = {name: len(values) for name, values in self.columns.items()}
        if len(set(lengths.values())) > 1:
            ContractViolation("CurveTable", f"columns of unequal lengths {lengths}").throw()
        if self.metadata.get("monte_carlo") and "replications" not in self.columns:
            ContractViolation("CurveTable", "Monte Carlo tables need a replications column").throw()

    def __len__(self) -> int:
        return len(next(iter(self.columns.values())))

    @property
    def axis(self) -> str:
        return next(iter(self.columns))

    def column(self, name: str) -> npt.NDArray[Any]:
        return np.asarray(self.columns[name])

    def rows(self) -> Iterator[dict[str, Any]]:
        names = list(self.columns)
        for values in zip(*self.columns.values()):
            yield dict(zip(names, values))

    def to_csv(self, path: str | Path) -> Path:
        """
        Writes the table to `path` and its metadata next to it, as
        `<stem>.meta.json`.

        Returns
        -------
        Path
            The sidecar path.
        """
        path = Path(path)
        with open(path, "w", newline="", encoding="utf-8") as stream_:
            writer = csv.writer(stream_)
            writer.writerow(list(self.columns))
            for values in zip(*self.columns.values()):
                writer.writerow([_scalar(v) for v in values])
        sidecar = path.with_suffix(".meta.json")
        meta = {"name": self.name, "rows": len(self), "columns": list(self.columns), **self.metadata}
        sidecar.write_text(json.dumps(meta, indent=2, sort_keys=True, default=_scalar) + "\n")
        return sidecar


def _scalar(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    return value


# --- analytical curves --- #


def bias_variance_curves(
    p_grid: npt.ArrayLike,
    m_list: Sequence[int] = (10, 100),
    r_list: Sequence[int] = (1, 10),
) -> CurveTable:
    """
    Bias, standard deviation and expected samples per trial of IBS with R
    repeats and of fixed sampling with M samples, on a grid of likelihoods.
    Fixed-sampling moments are exact binomial sums; IBS is unbiased with
    standard deviation sqrt(Li_2(1 - p) / R).
    """
    p = np.asarray(p_grid, dtype=np.float64)
    if p.ndim != 1 or np.any(~(p > 0.0)) or np.any(p > 1.0):
        DomainError("bias_variance_curves", p).throw()
    li2 = dilog_array(1.0 - p)
    columns: dict[str, Sequence[Any]] = {"p": p.tolist(), "ibs_bias": [0.0] * len(p)}
    for r in r_list:
        columns[f"ibs_std_R{r}"] = np.sqrt(li2 / r).tolist()
        columns[f"ibs_samples_R{r}"] = (r / p).tolist()
    for m in m_list:
        columns[f"fixed_bias_M{m}"] = [fixed_bias_exact(float(q), m) for q in p]
        columns[f"fixed_std_M{m}"] = [math.sqrt(fixed_variance_exact(float(q), m)) for q in p]
        columns[f"fixed_samples_M{m}"] = [float(m)] * len(p)
    return CurveTable("bias_variance", columns, {"m_list": list(m_list), "r_list": list(r_list)})


def master_curve_table(
    lambdas: npt.ArrayLike, m_list: Sequence[int] = (100,)
) -> CurveTable:
    """
    Fixed-sampling bias against lambda = p M, next to its large-M limit.
    """
    lam = np.asarray(lambdas, dtype=np.float64)
    if np.any(~(lam > 0.0)) or any(np.any(lam > m) for m in m_list):
        DomainError("master_curve_table", lam).throw()
    columns: dict[str, Sequence[Any]] = {
        "lambda": lam.tolist(),
        "master": [bias_master_curve(float(x)) for x in lam],
    }
    for m in m_list:
        columns[f"fixed_bias_M{m}"] = [fixed_bias_exact(float(x) / m, m) for x in lam]
    return CurveTable("master_curve", columns, {"m_list": list(m_list)})


def info_bound_table(p_grid: npt.ArrayLike) -> CurveTable:
    """
    Standard deviation of IBS next to the lower bound sqrt(1 - p) on the
    standard deviation of any unbiased estimator of log p.
    """
    p = np.asarray(p_grid, dtype=np.float64)
    if np.any(~(p > 0.0)) or np.any(~(p < 1.0)):
        DomainError("info_bound_table", p).throw()
    ibs_std = np.sqrt(dilog_array(1.0 - p))
    bound = np.sqrt(1.0 - p)
    return CurveTable(
        "info_bound",
        {
            "p": p.tolist(),
            "ibs_std": ibs_std.tolist(),
            "bound_std": bound.tolist(),
            "ratio": (ibs_std / bound).tolist(),
        },
    )


# --- Monte Carlo checks of the estimators --- #


class FixedMonteCarlo(NamedTuple):
    bias: float
    std_error: float
    std: float
    runs: int


def fixed_bias_monte_carlo(p: float, big_m: int, runs: int = 100_000, seed: int = 0) -> FixedMonteCarlo:
    """
    Monte Carlo bias of fixed sampling, with its standard error and the
    spread of the estimates.
    """
    if not 0.0 < p <= 1.0:
        DomainError("fixed_bias_monte_carlo", p).throw()
    if runs < 2:
        ContractViolation("fixed_bias_monte_carlo", f"runs must be >= 2, got {runs}").throw()
    hits = np.random.default_rng(seed).binomial(big_m, p, size=runs)
    errors = fixed_estimates(hits, big_m) - math.log(p)
    std = float(errors.std(ddof=1))
    return FixedMonteCarlo(float(errors.mean()), std / math.sqrt(runs), std, runs)


def fixed_curves_monte_carlo(
    p_grid: npt.ArrayLike, m_list: Sequence[int] = (10, 100), runs: int = 10_000, seed: int = 0
) -> CurveTable:
    """
    Monte Carlo counterpart of the fixed-sampling columns of
    `bias_variance_curves`.
    """
    p = np.asarray(p_grid, dtype=np.float64)
    columns: dict[str, Sequence[Any]] = {"p": p.tolist(), "replications": [runs] * len(p)}
    for j, m in enumerate(m_list):
        cells = [fixed_bias_monte_carlo(float(q), m, runs, derive_seed(seed, j, i)) for i, q in enumerate(p)]
        columns[f"fixed_bias_M{m}"] = [c.bias for c in cells]
        columns[f"fixed_bias_se_M{m}"] = [c.std_error for c in cells]
        columns[f"fixed_std_M{m}"] = [c.std for c in cells]
    return CurveTable("fixed_monte_carlo", columns, {"seed": seed, "monte_carlo": True})


def psychometric_trial_probabilities(
    theta: npt.ArrayLike | None = None, n_trials: int = 600, seed: int = 0
) -> npt.NDArray[np.float64]:
    """
    Likelihoods of the observed responses of one simulated orientation
    dataset, a realistic distribution of trial probabilities.
    """
    model = OrientationModel()
    theta = ORIENTATION_BASELINE.as_vector() if theta is None else np.asarray(theta, dtype=np.float64)
    data = model.generate(n_trials, theta, seed)
    return np.exp(model.exact_trial_logliks(data.stimuli, data.responses, theta))


def estimator_rmse_study(
    p_pool: npt.ArrayLike,
    n_list: Sequence[int] = (10, 100, 500),
    repeats: Sequence[int] = (1, 2, 5, 10, 20),
    samples: Sequence[int] = (1, 2, 5, 10, 20, 50, 100),
    runs: int = 1000,
    seed: int = 0,
) -> CurveTable:
    """
    RMSE of the summed log-likelihood of N trials, whose likelihoods are
    drawn from `p_pool`, for IBS with each number of repeats and fixed
    sampling with each number of samples. Both methods see the same trials.
    """
    pool = np.asarray(p_pool, dtype=np.float64)
    if pool.ndim != 1 or pool.size == 0 or np.any(~(pool > 0.0)) or np.any(pool > 1.0):
        DomainError("estimator_rmse_study", pool).throw()
    rows: list[tuple[int, str, int, float, float, float]] = []
    for i, n in enumerate(n_list):
        p = pool[stream(seed, i, 0).integers(pool.size, size=(runs, n))]
        truth = np.log(p).sum(axis=1)
        for j, r in enumerate(repeats):
            k = ibs_k_samples(p[:, None, :], stream(seed, i, 1, j), size=(runs, r, n))
            errors = ibs_values(k).mean(axis=1).sum(axis=1) - truth
            per_trial = float(k.sum()) / (runs * n)
            rows.append((n, "ibs", r, per_trial, float(errors.mean()), float(np.sqrt(np.mean(errors**2)))))
        for j, m in enumerate(samples):
            hits = stream(seed, i, 2, j).binomial(m, p)
            errors = fixed_estimates(hits, m).sum(axis=1) - truth
            rows.append((n, "fixed", m, float(m), float(errors.mean()), float(np.sqrt(np.mean(errors**2)))))
        logger.info("RMSE study: N=%d done", n)
    names = ("n_trials", "method", "setting", "samples_per_trial", "bias", "rmse")
    columns: dict[str, Sequence[Any]] = {name: [row[c] for row in rows] for c, name in enumerate(names)}
    columns["replications"] = [runs] * len(rows)
    return CurveTable("estimator_rmse", columns, {"seed": seed, "monte_carlo": True})


# --- allocation --- #


@dataclass(frozen=True, eq=False)
class GainSummary:
    """
    Precision gains of the optimal repeat allocation over `gains.size`
    draws of trial likelihoods; `rounded` holds the gains of the integer
    allocation.
    """

    gains: npt.NDArray[np.float64]
    rounded: npt.NDArray[np.float64]
    n_trials: int
    seed: int

    @property
    def median(self) -> float:
        return float(np.median(self.gains))

    @property
    def iqr(self) -> tuple[float, float]:
        low, high = np.quantile(self.gains, [0.25, 0.75])
        return float(low), float(high)

    @property
    def rounded_median(self) -> float:
        return float(np.median(self.rounded))

    @property
    def rounded_iqr(self) -> tuple[float, float]:
        low, high = np.quantile(self.rounded, [0.25, 0.75])
        return float(low), float(high)

    def to_dict(self) -> dict[str, Any]:
        return {
            "n_trials": self.n_trials,
            "draws": int(self.gains.size),
            "seed": self.seed,
            "median": self.median,
            "iqr": list(self.iqr),
            "rounded_median": self.rounded_median,
            "rounded_iqr": list(self.rounded_iqr),
        }


def uniform_probabilities(rng: np.random.Generator, n: int) -> npt.NDArray[np.float64]:
    # uniform on (0, 1]
    return 1.0 - rng.random(n)


def allocation_gain_study(
    distribution: Callable[[np.random.Generator, int], npt.NDArray[np.float64]] = uniform_probabilities,
    n_trials: int = 500,
    n_draws: int = 1000,
    seed: int = 0,
    budget_factor: float = 10.0,
) -> GainSummary:
    """
    Draws `n_draws` sets of `n_trials` likelihoods from `distribution` and
    computes the continuous and integer allocation gains of each.
    """
    if n_draws < 1 or n_trials < 1:
        ContractViolation("allocation_gain_study", "n_trials and n_draws must be >= 1").throw()
    gains = np.empty(n_draws)
    rounded = np.empty(n_draws)
    for d in range(n_draws):
        p = distribution(stream(seed, d), n_trials)
        gains[d] = allocation_gain(p)
        rounded[d] = rounded_allocation_gain(p, budget_factor)
    summary = GainSummary(gains, rounded, n_trials, seed)
    logger.info("Allocation gain: median %.3f, rounded median %.3f", summary.median, summary.rounded_median)
    return summary


# --- information quantities --- #


class DivergenceEstimate(NamedTuple):
    cross_entropy: InformationEstimate
    entropy: InformationEstimate

    @property
    def kl(self) -> InformationEstimate:
        """
        KL(p || q) = H(p, q) - H(p); both terms come from independent runs.
        """
        return InformationEstimate(
            self.cross_entropy.value - self.entropy.value,
            self.cross_entropy.variance + self.entropy.variance,
        )


def kl_and_cross_entropy(
    source: SimulatorModel,
    target: SimulatorModel,
    runs: int,
    config: EngineConfig = EngineConfig(),
    source_theta: npt.ArrayLike = (),
    target_theta: npt.ArrayLike = (),
) -> Result[DivergenceEstimate, SampleCapReached]:
    """
    Cross-entropy H(p, q) and entropy H(p) of the response distributions of
    `source` (p) and `target` (q); the KL divergence follows.
    """
    match estimate_cross_entropy(source, target, runs, config, source_theta, target_theta):
        case Err(error):
            return Err(error)
        case Ok(cross):
            pass
    entropy_config = replace(config, master_seed=derive_seed(config.master_seed, 1))
    return estimate_entropy(source, runs, entropy_config, source_theta).map(
        lambda entropy: DivergenceEstimate(cross, entropy)
    )


# --- calibration --- #


def coverage(z: npt.ArrayLike, beta: float) -> float:
    """
    Fraction of z-scores within [-beta, beta].
    """
    z = np.asarray(z, dtype=np.float64)
    return float(np.mean(np.abs(z) <= beta))


@dataclass(frozen=True, eq=False)
class CalibrationReport:
    """
    z-scores of IBS estimates against exact log-likelihoods, one per
    simulated dataset.

    Attributes
    ----------
    z_exact: np.ndarray
        Standardised with the exact variance sum_i Li_2(1 - p_i) / R_i.
    z_estimated: np.ndarray
        Standardised with the estimated variance of each run.
    sample_z: np.ndarray
        Standardised total number of samples drawn.
    """

    z_exact: npt.NDArray[np.float64]
    z_estimated: npt.NDArray[np.float64]
    sample_z: npt.NDArray[np.float64]
    n_trials: int
    seed: int

    def coverage_exact(self, beta: float) -> float:
        return coverage(self.z_exact, beta)

    def coverage_estimated(self, beta: float) -> float:
        return coverage(self.z_estimated, beta)

    @property
    def mean_z(self) -> float:
        return float(np.mean(self.z_estimated))

    @property
    def skew(self) -> float:
        return float(stats.skew(self.z_estimated))

    @property
    def excess_kurtosis(self) -> float:
        return float(stats.kurtosis(self.z_estimated))

    def to_dict(self) -> dict[str, Any]:
        return {
            "n_datasets": int(self.z_estimated.size),
            "n_trials": self.n_trials,
            "seed": self.seed,
            "coverage_exact": {str(b): self.coverage_exact(b) for b in COVERAGE_LEVELS},
            "coverage_estimated": {str(b): self.coverage_estimated(b) for b in COVERAGE_LEVELS},
            "mean_z_exact": float(np.mean(self.z_exact)),
            "mean_z_estimated": self.mean_z,
            "skew": self.skew,
            "excess_kurtosis": self.excess_kurtosis,
            "sample_z_skew": float(stats.skew(self.sample_z)),
        }

    def to_table(self) -> CurveTable:
        n = int(self.z_estimated.size)
        return CurveTable(
            "calibration",
            {
                "dataset": list(range(n)),
                "z_exact": self.z_exact.tolist(),
                "z_estimated": self.z_estimated.tolist(),
                "sample_z": self.sample_z.tolist(),
            },
            {"seed": self.seed, "n_trials": self.n_trials},
        )


def calibration_experiment(
    model: SimulatorModel,
    theta_true: npt.ArrayLike,
    n_datasets: int = 1000,
    config: EngineConfig = EngineConfig(),
    n_trials: int | None = None,
    workers: int = 1,
) -> Result[CalibrationReport, SampleCapReached | NoExactLikelihood]:
    """
    Simulates `n_datasets` datasets at `theta_true`, estimates each
    log-likelihood with IBS (no early stopping) and standardises the error
    against the exact value. Seeds derive from `config.master_seed`.
    """
    theta = np.asarray(theta_true, dtype=np.float64)
    n = model.default_trials if n_trials is None else n_trials
    seed = config.master_seed

    def cell(d: int) -> Result[tuple[float, float, float], SampleCapReached | NoExactLikelihood]:
        data = model.generate(n, theta, derive_seed(seed, d, 0))
        exact = model.exact_trial_logliks(data.stimuli, data.responses, theta)
        if exact is None:
            return Err(NoExactLikelihood(model.name))
        run = replace(config, master_seed=derive_seed(seed, d, 1), early_stop_threshold=None, workers=1)
        match estimate_parallel(model, data, theta, run):
            case Err(error):
                return Err(error)
            case Ok(report):
                pass
        p = np.exp(exact)
        repeats = run.repeats_for(n)
        error = report.loglik - float(exact.sum())
        exact_variance = float(np.sum(dilog_array(1.0 - p) / repeats))
        mean_samples = float(np.sum(repeats / p))
        var_samples = float(np.sum(repeats * (1.0 - p) / p**2))
        return Ok(
            (
                error / math.sqrt(exact_variance) if exact_variance > 0 else math.nan,
                error / math.sqrt(report.variance) if report.variance > 0 else math.nan,
                (report.total_samples - mean_samples) / math.sqrt(var_samples) if var_samples > 0 else math.nan,
            )
        )

    match collect_results(_map(cell, list(range(n_datasets)), workers, model.thread_safe)):
        case Err(error):
            return Err(error)
        case Ok(scores):
            pass
    z = np.array(scores, dtype=np.float64).reshape(-1, 3)
    report = CalibrationReport(z[:, 0], z[:, 1], z[:, 2], n, seed)
    logger.info(
        "Calibration over %d datasets: coverage(1.96) %.3f, mean z %.3f",
        n_datasets,
        report.coverage_estimated(1.96),
        report.mean_z,
    )
    return Ok(report)


# --- early stopping --- #


@dataclass(frozen=True, eq=False)
class EarlyStopSummary:
    exact: float
    threshold: float
    estimates: npt.NDArray[np.float64]
    stopped: npt.NDArray[np.bool_]
    seed: int

    @property
    def mean(self) -> float:
        return float(np.mean(self.estimates))

    @property
    def std_error(self) -> float:
        if self.estimates.size < 2:
            return math.nan
        return float(np.std(self.estimates, ddof=1) / math.sqrt(self.estimates.size))

    @property
    def bias(self) -> float:
        return self.mean - self.exact

    @property
    def stopped_fraction(self) -> float:
        return float(np.mean(self.stopped))

    def to_dict(self) -> dict[str, Any]:
        return {
            "runs": int(self.estimates.size),
            "seed": self.seed,
            "exact": self.exact,
            "threshold": self.threshold,
            "mean": self.mean,
            "std_error": self.std_error,
            "bias": self.bias,
            "stopped_fraction": self.stopped_fraction,
        }


def early_stop_study(
    model: SimulatorModel,
    data: Dataset,
    theta: npt.ArrayLike,
    threshold: float,
    runs: int = 200,
    repeats: int = 1,
    seed: int = 0,
    workers: int = 1,
) -> Result[EarlyStopSummary, SampleCapReached | NoExactLikelihood]:
    """
    Repeats an early-stopped IBS estimate `runs` times at `theta` and
    compares the mean to the exact log-likelihood.
    """
    match model.exact_loglik(data, theta):
        case Err(error):
            return Err(error)
        case Ok(exact):
            pass

    def run(r: int) -> Result[tuple[float, bool], SampleCapReached]:
        config = EngineConfig(repeats, threshold, None, derive_seed(seed, r), 1)
        return estimate_parallel(model, data, theta, config).map(lambda rep: (rep.loglik, rep.stopped_early))

    match collect_results(_map(run, list(range(runs)), workers, model.thread_safe)):
        case Err(error):
            return Err(error)
        case Ok(outcomes):
            pass
    estimates = np.array([o[0] for o in outcomes])
    stopped = np.array([o[1] for o in outcomes], dtype=np.bool_)
    return Ok(EarlyStopSummary(exact, threshold, estimates, stopped, seed))


# --- parameter recovery --- #


@dataclass(frozen=True)
class RecoveryRecord:
    """
    One fit of one estimator to one simulated dataset. `theta_hat` is None
    when the fit failed, with the reason in `status`.
    """

    theta_index: int
    dataset: int
    method: str
    theta_true: tuple[float, ...]
    theta_hat: tuple[float, ...] | None
    samples_per_trial: float
    loglik_loss: float
    budget_exhausted: bool
    status: str = "ok"


def _record(
    t: int, d: int, theta: npt.NDArray[np.float64], label: str, fit: Result[FitResult, Any], n: int
) -> tuple[RecoveryRecord, FitResult | None]:
    truth = tuple(float(x) for x in theta)
    match fit:
        case Ok(result):
            per_trial = result.search_samples / max(result.evaluations_used, 1) / n
            record = RecoveryRecord(
                t, d, label, truth, tuple(float(x) for x in result.theta_hat),
                per_trial, math.nan, result.budget_exhausted,
            )
            return record, result
        case Err(error):
            return RecoveryRecord(t, d, label, truth, None, math.nan, math.nan, False, str(error)), None
    raise AssertionError("unreachable")


def recover_parameters(
    model: SimulatorModel,
    thetas: npt.ArrayLike,
    estimators: Sequence[Estimator],
    n_datasets: int,
    n_trials: int | None = None,
    optimizer: OptimizerConfig = OptimizerConfig(),
    seed: int = 0,
    workers: int = 1,
) -> list[RecoveryRecord]:
    """
    For each parameter vector in `thetas`, simulates `n_datasets` datasets
    and fits each of them with every estimator. Estimators are paired: they
    all fit the same datasets. For models with an exact likelihood, each
    record carries the exact log-likelihood lost against the exact fit.
    """
    thetas = np.atleast_2d(np.asarray(thetas, dtype=np.float64))
    n = model.default_trials if n_trials is None else n_trials
    jobs = [(t, d) for t in range(len(thetas)) for d in range(n_datasets)]

    def cell(job: tuple[int, int]) -> list[RecoveryRecord]:
        t, d = job
        data = model.generate(n, thetas[t], derive_seed(seed, t, d))
        records: list[RecoveryRecord] = []
        fits: list[FitResult | None] = []
        exact_fit: FitResult | None = None
        for m, estimator in enumerate(estimators):
            config = replace(optimizer, seed=derive_seed(seed, t, d, m + 1), workers=1)
            record, fit = _record(t, d, thetas[t], estimator.label, fit_mle(model, data, estimator, config), n)
            records.append(record)
            fits.append(fit)
            if isinstance(estimator, ExactEstimator):
                exact_fit = fit
        if exact_fit is None and model.has_exact_likelihood:
            config = replace(optimizer, seed=derive_seed(seed, t, d, 0), workers=1)
            exact_fit = fit_mle(model, data, ExactEstimator(), config).unwrap_or(None)
        if exact_fit is not None:
            best = exact_fit.loglik_at_solution
            records = [
                r if f is None else replace(r, loglik_loss=loglik_loss(model, data, f, best))
                for r, f in zip(records, fits)
            ]
        logger.info("Recovery cell theta %d, dataset %d done", t, d)
        return records

    return [record for cell_records in _map(cell, jobs, workers, model.thread_safe) for record in cell_records]


def summarize_recovery(
    records: Sequence[RecoveryRecord], names: Sequence[str], metadata: dict[str, Any] | None = None
) -> CurveTable:
    """
    One row per (parameter vector, method): mean, bias, standard deviation
    and RMSE of each recovered parameter, the average samples per trial and
    per evaluation, and the median log-likelihood loss.
    """
    cells: dict[tuple[int, str], list[RecoveryRecord]] = {}
    for record in records:
        cells.setdefault((record.theta_index, record.method), []).append(record)
    columns: dict[str, list[Any]] = {
        key: [] for key in ("theta_index", "method", "status", "replications", "n_failed")
    }
    for name in names:
        for suffix in ("true", "mean", "bias", "sd", "rmse"):
            columns[f"{name}_{suffix}"] = []
    columns["samples_per_trial"] = []
    columns["loss_median"] = []
    columns["budget_exhausted"] = []
    for (t, method), cell in cells.items():
        fitted = [r for r in cell if r.theta_hat is not None]
        failed = len(cell) - len(fitted)
        columns["theta_index"].append(t)
        columns["method"].append(method)
        columns["status"].append("ok" if not failed else "failed" if not fitted else "partial")
        columns["replications"].append(len(cell))
        columns["n_failed"].append(failed)
        truth = np.array(cell[0].theta_true)
        estimates = np.array([r.theta_hat for r in fitted]).reshape(len(fitted), len(names))
        for j, name in enumerate(names):
            errors = estimates[:, j] - truth[j]
            columns[f"{name}_true"].append(float(truth[j]))
            columns[f"{name}_mean"].append(float(estimates[:, j].mean()) if fitted else math.nan)
            columns[f"{name}_bias"].append(float(errors.mean()) if fitted else math.nan)
            columns[f"{name}_sd"].append(float(estimates[:, j].std(ddof=1)) if len(fitted) > 1 else math.nan)
            columns[f"{name}_rmse"].append(float(np.sqrt(np.mean(errors**2))) if fitted else math.nan)
        columns["samples_per_trial"].append(
            float(np.mean([r.samples_per_trial for r in fitted])) if fitted else math.nan
        )
        losses = [r.loglik_loss for r in fitted if not math.isnan(r.loglik_loss)]
        columns["loss_median"].append(float(np.median(losses)) if losses else math.nan)
        columns["budget_exhausted"].append(sum(r.budget_exhausted for r in fitted))
    return CurveTable("recovery", columns, {"monte_carlo": True, **(metadata or {})})


def rmse_sweep(
    model: SimulatorModel,
    thetas: npt.ArrayLike,
    estimators: Sequence[Estimator],
    n_datasets: int,
    n_trials: int | None = None,
    optimizer: OptimizerConfig = OptimizerConfig(),
    seed: int = 0,
    workers: int = 1,
) -> CurveTable:
    """
    `recover_parameters` summarised by `summarize_recovery`.
    """
    records = recover_parameters(model, thetas, estimators, n_datasets, n_trials, optimizer, seed, workers)
    metadata = {
        "model": model.name,
        "seed": seed,
        "n_trials": model.default_trials if n_trials is None else n_trials,
        "methods": [e.label for e in estimators],
    }
    return summarize_recovery(records, model.parameter_space().names, metadata)
