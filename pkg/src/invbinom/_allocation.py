"""
Distribution of IBS repeats across trials.

With R_i repeats on trial i, trial variance Li_2(1 - p_i) / R_i and expected
cost sum_i R_i / p_i, the variance of the summed estimate at an expected
budget S is minimised by

    R_i* = S sqrt(p_i Li_2(1 - p_i)) / sum_j sqrt(Li_2(1 - p_j) / p_j)

so trials with p_i near 1/2 get the most repeats.

@date: 18.10.2026
"""

from __future__ import annotations

import logging

import numpy as np
import numpy.typing as npt

from ._checks import BudgetInfeasible, DomainError, SampleCapReached
from ._engine import EngineConfig, estimate_parallel
from ._results import Err, Ok, Result
from ._special import dilog_array
from .dataset import Dataset
from .models import SimulatorModel

logger = logging.getLogger(__name__)


def _probabilities(p: npt.ArrayLike, function: str) -> npt.NDArray[np.float64]:
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1 or p.size == 0 or np.any(~(p > 0.0)) or np.any(p > 1.0):
        DomainError(function, p).throw()
    return p


def optimal_repeats(p: npt.ArrayLike, budget: float) -> npt.NDArray[np.float64]:
    """
    Continuous optimum R_i* for an expected budget of `budget` samples.
    """
    p = _probabilities(p, "optimal_repeats")
    li2 = dilog_array(1.0 - p)
    norm = float(np.sum(np.sqrt(li2 / p)))
    if norm == 0.0:
        # every trial is certain; no repeat reduces any variance
        return np.zeros_like(p)
    return budget * np.sqrt(p * li2) / norm


def allocate_repeats(
    p_hat: npt.ArrayLike, budget: float
) -> Result[npt.NDArray[np.int64], BudgetInfeasible]:
    """
    Integer repeats per trial: the continuous optimum rounded up, and at
    least one repeat per trial.

    Returns
    -------
    Result[np.ndarray, BudgetInfeasible]
        Err when `budget` is below sum_i 1 / p_i, the expected cost of a
        single repeat on every trial.
    """
    p = _probabilities(p_hat, "allocate_repeats")
    minimum = float(np.sum(1.0 / p))
    if budget < minimum:
        return Err(BudgetInfeasible(budget, minimum))
    return Ok(np.maximum(1, np.ceil(optimal_repeats(p, budget))).astype(np.int64))


def allocation_gain(p: npt.ArrayLike) -> float:
    """
    Precision gain of the optimal allocation over uniform repeats at equal
    expected cost:

        sum_i Li_2(1 - p_i) * sum_i 1/p_i / (sum_i sqrt(Li_2(1 - p_i) / p_i))^2

    which is at least 1, with equality iff p is constant.
    """
    p = _probabilities(p, "allocation_gain")
    li2 = dilog_array(1.0 - p)
    denominator = float(np.sum(np.sqrt(li2 / p))) ** 2
    if denominator == 0.0:
        return 1.0
    return float(np.sum(li2) * np.sum(1.0 / p) / denominator)


def rounded_allocation_gain(p: npt.ArrayLike, budget_factor: float = 10.0) -> float:
    """
    Gain of the integer allocation `allocate_repeats` at a budget of
    `budget_factor` uniform repeats, against uniform repeats spending the
    same expected cost as the rounded allocation.
    """
    p = _probabilities(p, "rounded_allocation_gain")
    li2 = dilog_array(1.0 - p)
    if not np.any(li2 > 0):
        return 1.0
    inverse = float(np.sum(1.0 / p))
    repeats = allocate_repeats(p, budget_factor * inverse).unwrap()
    cost = float(np.sum(repeats / p))
    uniform_variance = float(np.sum(li2)) * inverse / cost
    return uniform_variance / float(np.sum(li2 / repeats))


def pilot_then_allocate(
    model: SimulatorModel,
    data: Dataset,
    theta0: npt.ArrayLike,
    pilot_repeats: int,
    budget: float,
    seed: int = 0,
    workers: int = 1,
) -> Result[npt.NDArray[np.int64], SampleCapReached | BudgetInfeasible]:
    """
    Runs a pilot IBS with `pilot_repeats` repeats at `theta0`, estimates
    p_i = R / sum_r K_ir for each trial, clamps it to [1 / (10 S), 1] and
    allocates the budget S.
    """
    if pilot_repeats < 1:
        DomainError("pilot_then_allocate (pilot_repeats)", pilot_repeats).throw()
    config = EngineConfig(repeats=pilot_repeats, master_seed=seed, workers=workers)
    match estimate_parallel(model, data, theta0, config):
        case Err(error):
            return Err(error)
        case Ok(report):
            pass
    total_k = np.array([sum(trial.k_values) for trial in report.trials], dtype=np.float64)
    p_hat = pilot_repeats / total_k
    floor = 1.0 / (10.0 * budget)
    clamped = int(np.sum(p_hat < floor))
    if clamped:
        logger.warning("Clamped %d pilot probabilities to %.3g", clamped, floor)
    p_hat = np.clip(p_hat, floor, 1.0)
    logger.info(
        "Pilot: %d samples, median p %.3f, minimum cost %.1f for budget %.1f",
        report.total_samples,
        float(np.median(p_hat)),
        float(np.sum(1.0 / p_hat)),
        budget,
    )
    return allocate_repeats(p_hat, budget)


def expected_cost(repeats: npt.ArrayLike, p: npt.ArrayLike) -> float:
    return float(np.sum(np.asarray(repeats) / np.asarray(p, dtype=np.float64)))


def allocated_variance(repeats: npt.ArrayLike, p: npt.ArrayLike) -> float:
    """
    Exact variance of the summed estimate under an allocation.
    """
    p = _probabilities(p, "allocated_variance")
    return float(np.sum(dilog_array(1.0 - p) / np.asarray(repeats, dtype=np.float64)))

