"""
Maximum-likelihood fitting with noisy log-likelihood estimates.

The search is a bound-constrained pattern search on a rescaled copy of the
parameter space (each parameter mapped so that its plausible range spans
[0, 1], lapse-like parameters through a logit). It polls the 2D coordinate
directions around the incumbent and accepts a point only if it beats the
incumbent by more than one pooled standard error. The incumbent value is
the running mean of all its evaluations; it is re-evaluated after every
failed poll, so repeated evaluations average the noise out. The mesh
halves after each failed poll and the search stops once it falls below a
floor, higher for noisy objectives where smaller steps are not resolved.

Every start yields its incumbent and, for noisy objectives, the optimum of
a quadratic fitted to the evaluations near it. All candidates are then
re-estimated at higher precision and the best one wins.

@date: 18.10.2026
"""

from __future__ import annotations

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Final

import numpy as np
import numpy.typing as npt
from scipy.special import expit, logit

from ._checks import ContractViolation, NoExactLikelihood, SampleCapReached
from ._engine import Estimator, Evaluation, derive_seed
from ._iterators import partition_results
from ._results import Err, Ok, Result
from .dataset import Dataset
from .models import ParameterSpace, SimulatorModel

logger = logging.getLogger(__name__)

_LOGIT_MARGIN: Final[float] = 1e-4

LogPrior = Callable[[npt.NDArray[np.float64]], float]
EvaluationError = SampleCapReached | NoExactLikelihood


def default_starts(space: ParameterSpace) -> list[npt.NDArray[np.float64]]:
    """
    Every combination of the points one third and two thirds of the way
    from the plausible lower to the plausible upper bound: 2^D starts.
    """
    thirds = [
        (p.plb + (p.pub - p.plb) / 3.0, p.plb + 2.0 * (p.pub - p.plb) / 3.0) for p in space
    ]
    return [np.array(combo) for combo in itertools.product(*thirds)]


@dataclass(frozen=True)
class OptimizerConfig:
    """
    Attributes
    ----------
    max_evaluations: int | None
        Evaluations allowed per start; None means 500 per dimension.
    starts: tuple[tuple[float, ...], ...] | None
        Starting points; None uses `default_starts`.
    incumbent_reestimates: int
        Fresh evaluations of the incumbent after each failed poll.
    final_precision_multiplier: int
        Precision multiplier of the candidates' final re-estimation.
    initial_mesh, min_mesh, noisy_min_mesh: float
        Mesh sizes in rescaled units; the search stops below `min_mesh`, or
        below `noisy_min_mesh` once the objective has shown noise.
    quadratic_refinement: bool
        Whether to propose the optimum of a local quadratic fit as an extra
        candidate for noisy objectives.
    log_prior: callable | None
        Added to the log-likelihood, turning the fit into a MAP estimate.
    """

    max_evaluations: int | None = None
    starts: tuple[tuple[float, ...], ...] | None = None
    incumbent_reestimates: int = 1
    final_precision_multiplier: int = 10
    seed: int = 0
    initial_mesh: float = 0.25
    min_mesh: float = 1e-4
    noisy_min_mesh: float = 1e-2
    quadratic_refinement: bool = True
    workers: int = 1
    log_prior: LogPrior | None = field(default=None, compare=False)

    def starts_for(self, space: ParameterSpace) -> list[npt.NDArray[np.float64]]:
        if self.starts is None:
            return default_starts(space)
        starts = [np.asarray(s, dtype=np.float64) for s in self.starts]
        for s in starts:
            if not (np.all(s > space.plausible_lower) and np.all(s < space.plausible_upper)):
                ContractViolation("OptimizerConfig", f"start {s} outside the plausible box").throw()
        return starts

    def budget_for(self, space: ParameterSpace) -> int:
        return self.max_evaluations or 500 * max(len(space), 1)


@dataclass(frozen=True)
class StartDiagnostics:
    index: int
    start: tuple[float, ...]
    theta: tuple[float, ...]
    incumbent_loglik: float
    reestimated_loglik: float
    reestimated_se: float
    evaluations: int
    samples: int
    final_mesh: float
    budget_exhausted: bool
    from_quadratic: bool = False


@dataclass(frozen=True, eq=False)
class FitResult:
    """
    Outcome of `fit_mle`. `loglik_at_solution` and `loglik_se` come from a
    fresh high-precision estimate at `theta_hat`, not from the search.
    """

    theta_hat: npt.NDArray[np.float64]
    loglik_at_solution: float
    loglik_se: float
    evaluations_used: int
    samples_used: int
    search_samples: int = 0
    starts: tuple[StartDiagnostics, ...] = ()
    budget_exhausted: bool = False
    estimator: str = ""

    def to_dict(self) -> dict[str, object]:
        return {
            "theta_hat": [float(t) for t in self.theta_hat],
            "loglik_at_solution": self.loglik_at_solution,
            "loglik_se": None if math.isnan(self.loglik_se) else self.loglik_se,
            "evaluations_used": self.evaluations_used,
            "samples_used": self.samples_used,
            "search_samples": self.search_samples,
            "budget_exhausted": self.budget_exhausted,
            "estimator": self.estimator,
            "starts": [
                {
                    "index": s.index,
                    "start": list(s.start),
                    "theta": list(s.theta),
                    "incumbent_loglik": s.incumbent_loglik,
                    "reestimated_loglik": s.reestimated_loglik,
                    "evaluations": s.evaluations,
                    "samples": s.samples,
                    "final_mesh": s.final_mesh,
                    "budget_exhausted": s.budget_exhausted,
                    "from_quadratic": s.from_quadratic,
                }
                for s in self.starts
            ],
        }


class _Coordinates:
    """
    Maps parameters to search units where the plausible box is [0, 1]^D.
    """

    def __init__(self, space: ParameterSpace) -> None:
        self.space = space
        self.logit = np.array([p.transform == "logit" for p in space])
        self.offset = self._transform(space.plausible_lower)
        self.scale = self._transform(space.plausible_upper) - self.offset
        self.lower = self.forward(space.lower)
        self.upper = self.forward(space.upper)

    def _transform(self, theta: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
        lb, ub = self.space.lower, self.space.upper
        span = np.where(ub > lb, ub - lb, 1.0)
        fraction = np.clip((theta - lb) / span, _LOGIT_MARGIN, 1 - _LOGIT_MARGIN)
        return np.where(self.logit, logit(fraction), theta)

    def forward(self, theta: npt.ArrayLike) -> npt.NDArray[np.float64]:
        return (self._transform(np.asarray(theta, dtype=np.float64)) - self.offset) / self.scale

    def backward(self, y: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
        t = y * self.scale + self.offset
        lb, ub = self.space.lower, self.space.upper
        theta = np.where(self.logit, lb + (ub - lb) * expit(t), t)
        return self.space.clip(theta)


@dataclass
class _Incumbent:
    y: npt.NDArray[np.float64]
    values: list[float]
    variances: list[float | None]

    @property
    def mean(self) -> float:
        return math.fsum(self.values) / len(self.values)

    @property
    def variance(self) -> float:
        """
        Variance of the running mean.
        """
        n = len(self.values)
        if all(v is not None for v in self.variances):
            return math.fsum(v for v in self.variances if v is not None) / n**2
        if n > 1:
            return float(np.var(self.values, ddof=1)) / n
        return 0.0


@dataclass
class _StartOutcome:
    index: int
    start: npt.NDArray[np.float64]
    incumbent: _Incumbent
    candidates: list[tuple[npt.NDArray[np.float64], bool]]
    evaluations: int
    samples: int
    mesh: float
    exhausted: bool


Objective = Callable[[npt.NDArray[np.float64], int], Result[Evaluation, EvaluationError]]


def _quadratic_optimum(
    points: npt.NDArray[np.float64],
    values: npt.NDArray[np.float64],
    weights: npt.NDArray[np.float64],
    centre: npt.NDArray[np.float64],
    radius: float,
) -> npt.NDArray[np.float64] | None:
    """
    Maximiser of a weighted least-squares quadratic through `points`,
    restricted to a box of half-width `radius` around `centre`. None when
    the fit is not concave or is underdetermined.
    """
    d = points.shape[1]
    x = points - centre
    pairs = list(itertools.combinations_with_replacement(range(d), 2))
    design = np.column_stack([np.ones(len(x)), x] + [x[:, i] * x[:, j] for i, j in pairs])
    if len(x) < design.shape[1] + d:
        return None
    sw = np.sqrt(weights)
    coef, *_ = np.linalg.lstsq(design * sw[:, None], values * sw, rcond=None)
    gradient = coef[1 : d + 1]
    hessian = np.zeros((d, d))
    for c, (i, j) in zip(coef[d + 1 :], pairs):
        if i == j:
            hessian[i, i] = 2.0 * c
        else:
            hessian[i, j] = hessian[j, i] = c
    if np.any(np.linalg.eigvalsh(hessian) >= 0):
        return None
    step = -np.linalg.solve(hessian, gradient)
    return centre + np.clip(step, -radius, radius)


def _search(
    objective: Objective,
    coords: _Coordinates,
    index: int,
    start: npt.NDArray[np.float64],
    config: OptimizerConfig,
) -> Result[_StartOutcome, EvaluationError]:
    d = len(coords.space)
    budget = config.budget_for(coords.space)
    rng = np.random.default_rng(derive_seed(config.seed, index, 0))
    counter = itertools.count()
    history: list[tuple[npt.NDArray[np.float64], float, float | None]] = []
    samples = 0

    def evaluate(y: npt.NDArray[np.float64]) -> Result[Evaluation, EvaluationError]:
        nonlocal samples
        evaluation = objective(coords.backward(y), derive_seed(config.seed, index, 1, next(counter)))
        if isinstance(evaluation, Ok):
            samples += evaluation.value.samples
            history.append((y.copy(), evaluation.value.loglik, evaluation.value.variance))
        return evaluation

    y = np.clip(coords.forward(start), coords.lower, coords.upper)
    match evaluate(y):
        case Err(error):
            return Err(error)
        case Ok(first):
            incumbent = _Incumbent(y, [first.loglik], [first.variance])
    mesh = config.initial_mesh
    noisy = False
    directions = np.concatenate([np.eye(d), -np.eye(d)])
    while len(history) < budget:
        floor = config.noisy_min_mesh if noisy else config.min_mesh
        if mesh < floor:
            break
        accepted = False
        for direction in directions[rng.permutation(len(directions))]:
            if len(history) >= budget:
                break
            candidate = np.clip(incumbent.y + mesh * direction, coords.lower, coords.upper)
            if np.array_equal(candidate, incumbent.y):
                continue
            match evaluate(candidate):
                case Err(error):
                    return Err(error)
                case Ok(trial):
                    pass
            pooled = math.sqrt((trial.variance or 0.0) + incumbent.variance)
            if trial.loglik - incumbent.mean > pooled:
                incumbent = _Incumbent(candidate, [trial.loglik], [trial.variance])
                accepted = True
                break
        if accepted:
            mesh = min(2.0 * mesh, config.initial_mesh)
            continue
        mesh /= 2.0
        for _ in range(config.incumbent_reestimates):
            if len(history) >= budget:
                break
            match evaluate(incumbent.y):
                case Err(error):
                    return Err(error)
                case Ok(again):
                    incumbent.values.append(again.loglik)
                    incumbent.variances.append(again.variance)
        noisy = noisy or incumbent.variance > 0.0 or len(set(incumbent.values)) > 1
        logger.debug(
            "Start %d: mesh %.4g, incumbent %.3f +- %.3f (%d evaluations)",
            index,
            mesh,
            incumbent.mean,
            math.sqrt(incumbent.variance),
            len(history),
        )
    exhausted = len(history) >= budget
    if exhausted:
        logger.warning("Start %d exhausted its budget of %d evaluations", index, budget)

    candidates = [(coords.backward(incumbent.y), False)]
    if noisy and config.quadratic_refinement:
        radius = max(8.0 * mesh, 4.0 * config.noisy_min_mesh)
        points = np.array([h[0] for h in history])
        near = np.all(np.abs(points - incumbent.y) <= radius, axis=1)
        variances = np.array([h[2] if h[2] is not None else incumbent.variance for h in history])
        optimum = _quadratic_optimum(
            points[near],
            np.array([h[1] for h in history])[near],
            1.0 / (variances[near] + 1e-12),
            incumbent.y,
            radius,
        )
        if optimum is not None:
            optimum = np.clip(optimum, coords.lower, coords.upper)
            candidates.append((coords.backward(optimum), True))
    return Ok(_StartOutcome(index, start, incumbent, candidates, len(history), samples, mesh, exhausted))


def fit_mle(
    model: SimulatorModel,
    data: Dataset,
    estimator: Estimator,
    config: OptimizerConfig = OptimizerConfig(),
) -> Result[FitResult, EvaluationError]:
    """
    Multi-start maximum-likelihood fit of `model` to `data`, evaluating the
    log-likelihood with `estimator`.

    Each start's candidates are re-estimated with
    `estimator.refined(config.final_precision_multiplier)`; the candidate
    with the highest re-estimate wins, ties going to fewer samples and
    then to the lower start index.

    Returns
    -------
    Result[FitResult, SampleCapReached | NoExactLikelihood]
        Err only if every start failed.
    """
    space = model.parameter_space()
    coords = _Coordinates(space)

    def objective(theta: npt.NDArray[np.float64], seed: int) -> Result[Evaluation, EvaluationError]:
        evaluation = estimator.evaluate(model, data, theta, seed)
        if config.log_prior is None or not isinstance(evaluation, Ok):
            return evaluation
        value = evaluation.value
        prior = config.log_prior(theta)
        return Ok(Evaluation(value.loglik + prior, value.variance, value.samples, value.stopped_early))

    starts = config.starts_for(space)
    jobs = list(enumerate(starts))
    if config.workers > 1 and model.thread_safe:
        with ThreadPoolExecutor(max_workers=config.workers) as executor:
            outcomes = list(executor.map(lambda job: _search(objective, coords, *job, config), jobs))
    else:
        outcomes = [_search(objective, coords, i, s, config) for i, s in jobs]

    succeeded, failed = partition_results(outcomes)
    for i, error in failed:
        logger.warning("Start %d failed: %s", i, error)
    if not succeeded:
        return Err(failed[0][1])

    final = estimator.refined(config.final_precision_multiplier)
    ranked = []
    diagnostics = []
    errors: list[EvaluationError] = [error for _, error in failed]
    for _, outcome in succeeded:
        for j, (theta, from_quadratic) in enumerate(outcome.candidates):
            seed = derive_seed(config.seed, outcome.index, 2, j)
            match final.evaluate(model, data, theta, seed):
                case Err(error):
                    logger.warning("Re-estimation of start %d failed: %s", outcome.index, error)
                    errors.append(error)
                    continue
                case Ok(evaluation):
                    pass
            if config.log_prior is not None:
                evaluation = Evaluation(
                    evaluation.loglik + config.log_prior(theta), evaluation.variance, evaluation.samples
                )
            se = math.nan if evaluation.variance is None else math.sqrt(evaluation.variance)
            diagnostics.append(
                StartDiagnostics(
                    outcome.index,
                    tuple(float(s) for s in outcome.start),
                    tuple(float(t) for t in theta),
                    outcome.incumbent.mean,
                    evaluation.loglik,
                    se,
                    outcome.evaluations,
                    outcome.samples,
                    outcome.mesh,
                    outcome.exhausted,
                    from_quadratic,
                )
            )
            ranked.append(((-evaluation.loglik, evaluation.samples, outcome.index, j), theta, evaluation, se))
    if not ranked:
        return Err(errors[0])
    _, theta_hat, best, se = min(ranked, key=lambda item: item[0])
    evaluations = sum(o.evaluations for _, o in succeeded)
    search_samples = sum(o.samples for _, o in succeeded)
    samples = search_samples + sum(r[2].samples for r in ranked)
    exhausted = any(o.exhausted for _, o in succeeded)
    result = FitResult(
        theta_hat,
        best.loglik,
        se,
        evaluations,
        samples,
        search_samples,
        tuple(diagnostics),
        exhausted,
        estimator.label,
    )
    logger.info(
        "Fit %s: theta %s, loglik %.3f +- %.3f after %d evaluations",
        estimator.label,
        np.array2string(theta_hat, precision=4),
        result.loglik_at_solution,
        se,
        evaluations,
    )
    return Ok(result)


def reestimate_at(
    model: SimulatorModel,
    data: Dataset,
    theta: npt.ArrayLike,
    estimator: Estimator,
    multiplier: int = 10,
    seed: int = 0,
) -> Result[tuple[float, float], EvaluationError]:
    """
    High-precision estimate at `theta`: `multiplier` times the repeats (or
    samples) of `estimator`. The standard error is NaN for estimators
    without a variance estimate.
    """
    if multiplier < 1:
        ContractViolation("reestimate_at", f"multiplier must be >= 1, got {multiplier}").throw()
    return estimator.refined(multiplier).evaluate(model, data, theta, seed).map(
        lambda e: (e.loglik, math.nan if e.variance is None else math.sqrt(e.variance))
    )


def loglik_loss(
    model: SimulatorModel, data: Dataset, fit: FitResult, exact_mle_loglik: float
) -> float:
    """
    Exact log-likelihood lost by `fit` relative to the exact maximum.
    Throws NotImplementedError for models without an exact likelihood.
    """
    return exact_mle_loglik - model.exact_loglik(data, fit.theta_hat).unwrap()
