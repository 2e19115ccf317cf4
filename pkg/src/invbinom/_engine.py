"""
Dataset-level estimation: IBS over every trial of a dataset, summed.

Two schedules are provided. `estimate_sequential` samples each trial in
turn until its response is reproduced. `estimate_parallel` proceeds in
rounds: every (trial, repeat) that has not hit yet draws its next block of
samples, which allows early stopping once the running upper bound of the
estimate falls below a threshold.

Every (trial, repeat) pair owns a `numpy.random.SeedSequence` stream keyed
by the master seed, the trial and the repeat, and draws from it in blocks
of 1, 2, 4, ... copies under either schedule. Both schedules therefore
return the same sample counts, and neither depends on the number of
workers.

@date: 18.10.2026
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Final, Iterator, NamedTuple, Protocol

import numpy as np
import numpy.typing as npt

from ._checks import ContractViolation, NoExactLikelihood, SampleCapReached
from ._estimators import fixed_estimates, ibs_values, ibs_variances
from ._results import Err, Ok, Result
from ._special import harmonic
from .dataset import Dataset
from .models import SimulatorModel

logger = logging.getLogger(__name__)

# stream families
_TRIAL: Final[int] = 0
_FIXED: Final[int] = 2
_SOURCE: Final[int] = 3

# (trial, repeat) pairs per batch
CHUNK_SIZE: Final[int] = 1024
_MAX_BLOCK: Final[int] = 4096

Matcher = Callable[[npt.NDArray[Any], npt.NDArray[Any]], npt.NDArray[np.bool_]]


def stream(seed: int, *key: int) -> np.random.Generator:
    """
    Independent random generator for `key` under the master `seed`.
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def derive_seed(seed: int, *key: int) -> int:
    """
    A 64-bit integer seed for `key` under `seed`, independent across keys.
    """
    state = np.random.SeedSequence(seed, spawn_key=key).generate_state(2, np.uint32)
    return int(state[0]) << 32 | int(state[1])


@dataclass(frozen=True)
class EngineConfig:
    """
    Attributes
    ----------
    repeats: int | tuple[int, ...]
        Uniform number of IBS repeats, or one count per trial.
    early_stop_threshold: float | None
        Stopping threshold in nats. Only `estimate_parallel` and `estimate_sequential`
        honour it; the estimate returned on stopping is exactly this value.
    per_trial_sample_cap: int | None
        Draws after which a (trial, repeat) without a hit aborts the run.
    master_seed: int
    workers: int
        Threads advancing chunks of pairs in a round. Never changes the result.
    """

    repeats: int | tuple[int, ...] = 1
    early_stop_threshold: float | None = None
    per_trial_sample_cap: int | None = None
    master_seed: int = 0
    workers: int = 1

    def repeats_for(self, n_trials: int) -> npt.NDArray[np.int64]:
        repeats = np.asarray(self.repeats, dtype=np.int64)
        if repeats.ndim == 0:
            repeats = np.full(n_trials, int(repeats), dtype=np.int64)
        elif repeats.shape != (n_trials,):
            ContractViolation(
                "EngineConfig", f"{repeats.size} per-trial repeats for {n_trials} trials"
            ).throw()
        if np.any(repeats < 1):
            ContractViolation("EngineConfig", "repeats must be >= 1").throw()
        return repeats

    @property
    def uniform_repeats(self) -> bool:
        return np.ndim(self.repeats) == 0


@dataclass(frozen=True)
class TrialRecord:
    k_values: tuple[int, ...]
    loglik: float
    variance: float


@dataclass(frozen=True)
class EstimateReport:
    """
    Log-likelihood estimate of a dataset.

    Attributes
    ----------
    loglik: float
        Sum of the per-trial estimates, or the threshold when stopped early.
    variance: float
        Sum of the per-trial variance estimates; 0 when stopped early.
    trials: tuple[TrialRecord, ...]
        Sample counts and estimates per trial, empty when stopped early.
    total_samples: int
        Simulator draws consumed.
    stopped_early: bool
    running_bounds: tuple[float, ...]
        Upper bound of the estimate after each round (rows-first schedule).
    """

    loglik: float
    variance: float
    trials: tuple[TrialRecord, ...]
    total_samples: int
    stopped_early: bool = False
    running_bounds: tuple[float, ...] = field(default=(), repr=False)

    @property
    def std_error(self) -> float:
        return math.sqrt(self.variance)

    @property
    def n_trials(self) -> int:
        return len(self.trials)

    @property
    def samples_per_trial(self) -> float:
        return self.total_samples / max(len(self.trials), 1)

    def trial_logliks(self) -> npt.NDArray[np.float64]:
        return np.array([t.loglik for t in self.trials])

    def to_dict(self) -> dict[str, Any]:
        return {
            "loglik": self.loglik,
            "variance": self.variance,
            "std_error": self.std_error,
            "total_samples": self.total_samples,
            "stopped_early": self.stopped_early,
            "trials": [
                {"k": list(t.k_values), "loglik": t.loglik, "variance": t.variance}
                for t in self.trials
            ],
        }


def _assemble(
    owner: npt.NDArray[np.int64],
    weight: npt.NDArray[np.float64],
    k: npt.NDArray[np.int64],
    n_trials: int,
    offsets: npt.NDArray[np.float64] | None = None,
) -> tuple[tuple[TrialRecord, ...], float, float]:
    per_trial = np.bincount(owner, weights=weight * ibs_values(k), minlength=n_trials)
    per_trial_var = np.bincount(owner, weights=weight**2 * ibs_variances(k), minlength=n_trials)
    if offsets is not None:
        per_trial = per_trial + offsets
    bounds = np.concatenate(([0], np.cumsum(np.bincount(owner, minlength=n_trials))))
    records = tuple(
        TrialRecord(
            tuple(int(x) for x in k[bounds[i] : bounds[i + 1]]),
            float(per_trial[i]),
            float(per_trial_var[i]),
        )
        for i in range(n_trials)
    )
    return records, float(np.sum(per_trial)), float(np.sum(per_trial_var))


@dataclass
class _PairSampler:
    """
    Draws for one (trial, repeat) pair, made in growing blocks of copies of
    the trial's stimulus from the pair's own stream.
    """

    trial: int
    rng: np.random.Generator
    drawn: int = 0
    block: int = 1

    @classmethod
    def keyed(cls, seed: int, trial: int, repeat: int) -> _PairSampler:
        return cls(trial, stream(seed, _TRIAL, trial, repeat))

    def exhausted(self, cap: int | None) -> bool:
        return cap is not None and self.drawn >= cap

    def advance(
        self,
        model: SimulatorModel,
        data: Dataset,
        theta: npt.NDArray[np.float64],
        cap: int | None,
        matcher: Matcher,
    ) -> int | None:
        """
        Draw the next block. Number of draws up to and including the first
        hit, or None when the block holds no hit.
        """
        size = self.block if cap is None else min(self.block, cap - self.drawn)
        idx = np.full(size, self.trial)
        simulated = model.simulate(data.stimuli[idx], theta, self.rng)
        hits = np.flatnonzero(matcher(simulated, data.responses[idx]))
        if hits.size:
            return self.drawn + int(hits[0]) + 1
        self.drawn += size
        self.block = min(2 * self.block, _MAX_BLOCK)
        return None

    def until_hit(
        self,
        model: SimulatorModel,
        data: Dataset,
        theta: npt.NDArray[np.float64],
        cap: int | None,
        matcher: Matcher,
    ) -> int | None:
        """
        Number of draws up to and including the first hit, None past the cap.
        """
        while not self.exhausted(cap):
            if (hit := self.advance(model, data, theta, cap, matcher)) is not None:
                return hit
        return None


def _sequential(
    model: SimulatorModel,
    data: Dataset,
    theta: npt.NDArray[np.float64],
    config: EngineConfig,
    matcher: Matcher,
) -> Result[tuple[npt.NDArray[np.int64], npt.NDArray[np.int64]] | int, SampleCapReached]:
    """
    Per-(trial, repeat) sample counts and their owners, or the number of
    samples drawn before an early stop.
    """
    repeats = config.repeats_for(len(data))
    owner = np.repeat(np.arange(len(data)), repeats)
    k = np.zeros(len(owner), dtype=np.int64)
    partial = 0.0
    pair = 0
    for trial, r_i in enumerate(repeats):
        for r in range(r_i):
            sampler = _PairSampler.keyed(config.master_seed, trial, r)
            match sampler.until_hit(model, data, theta, config.per_trial_sample_cap, matcher):
                case None:
                    return Err(SampleCapReached(trial, int(config.per_trial_sample_cap or 0)))
                case hit:
                    k[pair] = hit
            partial += float(ibs_values(k[pair])) / r_i
            pair += 1
        threshold = config.early_stop_threshold
        if threshold is not None and partial < threshold:
            logger.info("Sequential run stopped at trial %d: %.3f < %.3f", trial, partial, threshold)
            return Ok(int(k[:pair].sum()))
    return Ok((owner, k))


def estimate_sequential(
    model: SimulatorModel,
    data: Dataset,
    theta: npt.ArrayLike,
    config: EngineConfig = EngineConfig(),
) -> Result[EstimateReport, SampleCapReached]:
    """
    IBS trial by trial: for each trial and repeat, simulate until a sample
    matches the observed response, and sum the resulting estimates.
    """
    theta = np.asarray(theta, dtype=np.float64)
    match _sequential(model, data, theta, config, model.matches):
        case Err(error):
            return Err(error)
        case Ok(int() as samples):
            threshold = float(config.early_stop_threshold)  # type: ignore[arg-type]
            return Ok(EstimateReport(threshold, 0.0, (), samples, stopped_early=True))
        case Ok((owner, k)):
            repeats = config.repeats_for(len(data))
            records, loglik, variance = _assemble(owner, 1.0 / repeats[owner], k, len(data))
            return Ok(EstimateReport(loglik, variance, records, int(k.sum())))
    raise AssertionError("unreachable")


@dataclass
class _RowsOutcome:
    owner: npt.NDArray[np.int64]
    k: npt.NDArray[np.int64]
    samples: int
    bounds: list[float]
    stopped: bool


def _chunks(active: npt.NDArray[np.int64]) -> Iterator[npt.NDArray[np.int64]]:
    for start in range(0, len(active), CHUNK_SIZE):
        yield active[start : start + CHUNK_SIZE]


def _rows_first(
    model: SimulatorModel,
    data: Dataset,
    theta: npt.NDArray[np.float64],
    config: EngineConfig,
    matcher: Matcher,
    threshold: float | None,
) -> Result[_RowsOutcome, SampleCapReached]:
    repeats = config.repeats_for(len(data))
    owner = np.repeat(np.arange(len(data)), repeats)
    weight = 1.0 / repeats[owner]
    pairs = [
        _PairSampler.keyed(config.master_seed, trial, r) for trial, r_i in enumerate(repeats) for r in range(r_i)
    ]
    k = np.zeros(len(owner), dtype=np.int64)
    active = np.arange(len(owner))
    finished_sum = 0.0
    bounds: list[float] = []
    cap = config.per_trial_sample_cap
    workers = config.workers if model.thread_safe else 1

    def advance(chunk: npt.NDArray[np.int64]) -> npt.NDArray[np.int64]:
        # 0 marks a pair still without a hit
        return np.array([pairs[i].advance(model, data, theta, cap, matcher) or 0 for i in chunk], dtype=np.int64)

    executor = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        while active.size:
            chunks = list(_chunks(active))
            if executor is None:
                parts = [advance(chunk) for chunk in chunks]
            else:
                parts = list(executor.map(advance, chunks))
            hit_at = np.concatenate(parts)
            hits = hit_at > 0
            finished = active[hits]
            k[finished] = hit_at[hits]
            finished_sum += float(np.sum(weight[finished] * ibs_values(k[finished])))
            active = active[~hits]
            # active pairs all follow the same block schedule
            drawn = pairs[active[0]].drawn if active.size else 0
            bound = finished_sum - harmonic(drawn) * float(np.sum(weight[active]))
            bounds.append(bound)
            logger.debug("Round %d: %d pairs left after %d draws, bound %.4f", len(bounds), active.size, drawn, bound)
            if threshold is not None and bound < threshold:
                logger.info("Early stop after %d draws per pair: bound %.3f < %.3f", drawn, bound, threshold)
                return Ok(_RowsOutcome(owner, k, int(k.sum()) + drawn * active.size, bounds, True))
            if active.size and pairs[active[0]].exhausted(cap):
                error = SampleCapReached(int(owner[active[0]]), drawn)
                error.add_notes(f"{active.size} (trial, repeat) pairs without a hit")
                logger.warning("%s", error)
                return Err(error)
    finally:
        if executor is not None:
            executor.shutdown()
    return Ok(_RowsOutcome(owner, k, int(k.sum()), bounds, False))


def estimate_parallel(
    model: SimulatorModel,
    data: Dataset,
    theta: npt.ArrayLike,
    config: EngineConfig = EngineConfig(),
) -> Result[EstimateReport, SampleCapReached]:
    """
    Rows-first IBS with optional early stopping.

    After each round, the running bound sums the final estimates of the
    pairs that hit and -H(k) for those still sampling, weighted by
    1 / R_i. It never increases; once below the threshold the run stops
    and returns the threshold.
    """
    theta = np.asarray(theta, dtype=np.float64)
    outcome = _rows_first(model, data, theta, config, model.matches, config.early_stop_threshold)
    match outcome:
        case Err(error):
            return Err(error)
        case Ok(rows) if rows.stopped:
            threshold = float(config.early_stop_threshold)  # type: ignore[arg-type]
            return Ok(EstimateReport(threshold, 0.0, (), rows.samples, True, tuple(rows.bounds)))
        case Ok(rows):
            repeats = config.repeats_for(len(data))
            records, loglik, variance = _assemble(rows.owner, 1.0 / repeats[rows.owner], rows.k, len(data))
            return Ok(EstimateReport(loglik, variance, records, rows.samples, False, tuple(rows.bounds)))
    raise AssertionError("unreachable")


def estimate_fixed(
    model: SimulatorModel,
    data: Dataset,
    theta: npt.ArrayLike,
    samples: int,
    variant: str = "standard",
    seed: int = 0,
    m_min: float = 0.5,
) -> EstimateReport:
    """
    Fixed sampling: `samples` draws per trial, log p estimated from the hit
    count. Variances are reported as NaN; fixed sampling has no calibrated
    variance estimate.
    """
    if samples < 1:
        ContractViolation("estimate_fixed", f"samples must be >= 1, got {samples}").throw()
    theta = np.asarray(theta, dtype=np.float64)
    n = len(data)
    hits = np.zeros(n, dtype=np.int64)
    per_chunk = max(1, CHUNK_SIZE // samples)
    for c, start in enumerate(range(0, n, per_chunk)):
        trials = np.repeat(np.arange(start, min(start + per_chunk, n)), samples)
        rng = stream(seed, _FIXED, c)
        matched = model.matches(model.simulate(data.stimuli[trials], theta, rng), data.responses[trials])
        hits += np.bincount(trials, weights=matched, minlength=n).astype(np.int64)
    logliks = fixed_estimates(hits, samples, variant, m_min)
    records = tuple(TrialRecord((samples,), float(v), math.nan) for v in logliks)
    return EstimateReport(float(np.sum(logliks)), math.nan, records, n * samples)


def aibs_estimate(
    model: SimulatorModel,
    data: Dataset,
    theta: npt.ArrayLike,
    metric: Callable[[npt.NDArray[Any], npt.NDArray[Any]], npt.NDArray[np.float64]],
    epsilon: float,
    volume: Callable[[npt.NDArray[Any], float], npt.NDArray[np.float64]],
    config: EngineConfig = EngineConfig(),
) -> Result[EstimateReport, SampleCapReached]:
    """
    Approximate IBS for continuous responses: a sample hits when it lies
    within `epsilon` of the observed response under `metric`, and each trial
    estimate is corrected by -log |B_eps(r_i)| given by `volume`.
    """
    if not epsilon > 0:
        ContractViolation("aibs_estimate", f"epsilon must be > 0, got {epsilon}").throw()
    theta = np.asarray(theta, dtype=np.float64)
    volumes = np.asarray(volume(data.responses, epsilon), dtype=np.float64)
    if np.any(volumes <= 0):
        ContractViolation("aibs_estimate", "ball volumes must be positive").throw()

    def within(simulated: npt.NDArray[Any], observed: npt.NDArray[Any]) -> npt.NDArray[np.bool_]:
        return np.asarray(metric(simulated, observed) <= epsilon)

    match _rows_first(model, data, theta, config, within, None):
        case Err(error):
            return Err(error)
        case Ok(rows):
            repeats = config.repeats_for(len(data))
            records, loglik, variance = _assemble(
                rows.owner, 1.0 / repeats[rows.owner], rows.k, len(data), -np.log(volumes)
            )
            return Ok(EstimateReport(loglik, variance, records, rows.samples))
    raise AssertionError("unreachable")


class InformationEstimate(NamedTuple):
    """
    Monte Carlo estimate of an entropy-like quantity (nats) and the
    variance of that estimate.
    """

    value: float
    variance: float

    @property
    def std_error(self) -> float:
        return math.sqrt(self.variance)


def _negated_mean(report: EstimateReport) -> InformationEstimate:
    values = -report.trial_logliks()
    if len(values) < 2:
        return InformationEstimate(float(values.mean()), report.variance)
    return InformationEstimate(float(values.mean()), float(values.var(ddof=1)) / len(values))


def estimate_cross_entropy(
    source: SimulatorModel,
    target: SimulatorModel,
    runs: int,
    config: EngineConfig = EngineConfig(),
    source_theta: npt.ArrayLike = (),
    target_theta: npt.ArrayLike = (),
) -> Result[InformationEstimate, SampleCapReached]:
    """
    H(p, q) = -E_p[log q(x)]: draws `runs` responses from `source` and
    estimates their log-probability under `target` with IBS. The variance
    is the empirical variance of the per-run estimates over `runs`.
    """
    if runs < 1:
        ContractViolation("estimate_cross_entropy", f"runs must be >= 1, got {runs}").throw()
    rng = stream(config.master_seed, _SOURCE)
    stimuli = source.sample_stimuli(runs, rng)
    responses = source.simulate(stimuli, np.asarray(source_theta, dtype=np.float64), rng)
    draws = Dataset(stimuli, responses, source.name)
    config = replace(config, early_stop_threshold=None)
    return estimate_parallel(target, draws, target_theta, config).map(_negated_mean)


def estimate_entropy(
    model: SimulatorModel,
    runs: int,
    config: EngineConfig = EngineConfig(),
    theta: npt.ArrayLike = (),
) -> Result[InformationEstimate, SampleCapReached]:
    """
    Shannon entropy of the response distribution of `model`: draw x ~ P,
    estimate log P(x) with IBS, negate and average.
    """
    return estimate_cross_entropy(model, model, runs, config, theta, theta)


@dataclass(frozen=True)
class Evaluation:
    """
    One noisy evaluation of the log-likelihood, as seen by the optimizer.
    `variance` is None when the estimator has no variance estimate.
    """

    loglik: float
    variance: float | None
    samples: int
    stopped_early: bool = False


class Estimator(Protocol):
    label: str

    def evaluate(
        self, model: SimulatorModel, data: Dataset, theta: npt.ArrayLike, seed: int
    ) -> Result[Evaluation, SampleCapReached | NoExactLikelihood]: ...

    def refined(self, multiplier: int) -> Estimator: ...


def _check_multiplier(multiplier: int) -> None:
    if multiplier < 1:
        ContractViolation("refined", f"multiplier must be >= 1, got {multiplier}").throw()


@dataclass(frozen=True)
class IbsEstimator:
    repeats: int = 1
    early_stop_threshold: float | None = None
    per_trial_sample_cap: int | None = None
    workers: int = 1

    @property
    def label(self) -> str:
        return f"ibs-R{self.repeats}"

    def config(self, seed: int) -> EngineConfig:
        return EngineConfig(
            self.repeats, self.early_stop_threshold, self.per_trial_sample_cap, seed, self.workers
        )

    def evaluate(
        self, model: SimulatorModel, data: Dataset, theta: npt.ArrayLike, seed: int
    ) -> Result[Evaluation, SampleCapReached]:
        return estimate_parallel(model, data, theta, self.config(seed)).map(
            lambda r: Evaluation(r.loglik, r.variance, r.total_samples, r.stopped_early)
        )

    def refined(self, multiplier: int) -> IbsEstimator:
        _check_multiplier(multiplier)
        return replace(self, repeats=self.repeats * multiplier)


@dataclass(frozen=True)
class FixedEstimator:
    samples: int = 10
    variant: str = "standard"
    m_min: float = 0.5

    @property
    def label(self) -> str:
        return f"fixed-M{self.samples}"

    def evaluate(
        self, model: SimulatorModel, data: Dataset, theta: npt.ArrayLike, seed: int
    ) -> Result[Evaluation, SampleCapReached]:
        report = estimate_fixed(model, data, theta, self.samples, self.variant, seed, self.m_min)
        return Ok(Evaluation(report.loglik, None, report.total_samples))

    def refined(self, multiplier: int) -> FixedEstimator:
        _check_multiplier(multiplier)
        return replace(self, samples=self.samples * multiplier)


@dataclass(frozen=True)
class ExactEstimator:
    label: str = "exact"

    def evaluate(
        self, model: SimulatorModel, data: Dataset, theta: npt.ArrayLike, seed: int
    ) -> Result[Evaluation, NoExactLikelihood]:
        return model.exact_loglik(data, theta).map(lambda loglik: Evaluation(loglik, 0.0, 0))

    def refined(self, multiplier: int) -> ExactEstimator:
        _check_multiplier(multiplier)
        return self


def check_exact_loglik(
    model: SimulatorModel,
    data: Dataset,
    theta: npt.ArrayLike,
    repeats: int = 10,
    seed: int = 0,
) -> Result[float, NoExactLikelihood | SampleCapReached]:
    """
    z-score of an exact log-likelihood against an independent IBS estimate.
    Values far outside a few units point at a mistake in the exact
    computation (or in the simulator).
    """
    match model.exact_loglik(data, theta):
        case Err(error):
            return Err(error)
        case Ok(exact):
            pass
    match estimate_parallel(model, data, theta, EngineConfig(repeats=repeats, master_seed=seed)):
        case Err(error):
            return Err(error)
        case Ok(report):
            if report.variance == 0.0:
                return Ok(0.0 if report.loglik == exact else math.copysign(math.inf, report.loglik - exact))
            return Ok((report.loglik - exact) / report.std_error)
    raise AssertionError("unreachable")
