"""
Test suite for the allocation of IBS repeats across trials.

@date: 18.10.2026
"""

import numpy as np
import pytest
from scipy import stats
from invbinom import (
    BudgetInfeasible,
    Err,
    allocate_repeats,
    allocation_gain,
    optimal_repeats,
    pilot_then_allocate,
    rounded_allocation_gain,
)
from invbinom._allocation import allocated_variance, expected_cost
from invbinom._special import dilog_array
from invbinom.dataset import Dataset
from invbinom.models import CategoricalModel, OrientationModel
from invbinom.models.orientation import BASELINE_THETA as ORIENTATION_BASELINE

SPREAD = np.array([0.05, 0.2, 0.5, 0.9, 0.99])


def test_optimal_repeats_spend_the_budget() -> None:
    repeats = optimal_repeats(SPREAD, budget=500.0)
    assert expected_cost(repeats, SPREAD) == pytest.approx(500.0)


def test_optimal_repeats_peak_at_intermediate_p() -> None:
    """
    Trials that are almost certain or almost impossible get few repeats.
    """
    grid = np.linspace(0.01, 0.99, 99)
    repeats = optimal_repeats(grid, budget=1000.0)
    assert 0.3 < grid[np.argmax(repeats)] < 0.6


def test_certain_trials_get_no_repeats() -> None:
    np.testing.assert_array_equal(optimal_repeats([1.0, 1.0], 10.0), [0.0, 0.0])
    assert allocation_gain([1.0, 1.0]) == 1.0


@pytest.mark.parametrize("p", [0.01, 0.3, 0.5, 0.999])
def test_gain_is_one_for_constant_p(p: float) -> None:
    assert allocation_gain(np.full(50, p)) == pytest.approx(1.0)


def test_gain_is_variance_ratio() -> None:
    """
    The gain equals the variance of uniform repeats over the variance of
    the optimum at the same expected cost.
    """
    budget = 1000.0
    uniform = np.full(len(SPREAD), budget / np.sum(1.0 / SPREAD))
    ratio = allocated_variance(uniform, SPREAD) / allocated_variance(optimal_repeats(SPREAD, budget), SPREAD)
    assert allocation_gain(SPREAD) == pytest.approx(ratio)
    assert allocation_gain(SPREAD) > 1.0


def test_gain_at_least_one() -> None:
    rng = np.random.default_rng(0)
    for _ in range(20):
        assert allocation_gain(1.0 - rng.random(100)) >= 1.0 - 1e-12


def test_gain_formula() -> None:
    li2 = dilog_array(1.0 - SPREAD)
    expected = li2.sum() * np.sum(1.0 / SPREAD) / np.sum(np.sqrt(li2 / SPREAD)) ** 2
    assert allocation_gain(SPREAD) == pytest.approx(expected)


def test_rounded_gain_below_continuous_gain() -> None:
    rounded = rounded_allocation_gain(SPREAD)
    assert 1.0 < rounded <= allocation_gain(SPREAD) * (1 + 1e-12)


def test_allocate_repeats() -> None:
    budget = 20 * float(np.sum(1.0 / SPREAD))
    repeats = allocate_repeats(SPREAD, budget).unwrap()
    assert repeats.dtype == np.int64
    assert np.all(repeats >= 1)
    assert expected_cost(repeats, SPREAD) >= budget


def test_allocate_repeats_infeasible_budget() -> None:
    match allocate_repeats(SPREAD, budget=10.0):
        case Err(BudgetInfeasible(budget=budget, minimum=minimum)):
            assert budget == 10.0
            assert minimum == pytest.approx(float(np.sum(1.0 / SPREAD)))
        case other:
            assert False, f"unexpected {other}"


@pytest.mark.parametrize("p", [[0.0, 0.5], [0.5, 1.2], [], [float("nan")]])
def test_invalid_probabilities(p: list[float]) -> None:
    with pytest.raises(ValueError):
        allocation_gain(p)


def test_pilot_then_allocate() -> None:
    model = CategoricalModel([0.1, 0.4, 0.5])
    responses = np.array([0, 1, 2] * 10)
    data = Dataset(np.zeros(len(responses)), responses, "categorical")
    repeats = pilot_then_allocate(model, data, (), pilot_repeats=5, budget=2000.0, seed=1).unwrap()
    assert repeats.shape == (len(data),)
    assert np.all(repeats >= 1)
    # the rare response costs the most per repeat
    assert repeats[responses == 0].mean() < repeats[responses == 2].mean()


def test_pilot_budget_too_small() -> None:
    model = CategoricalModel([0.1, 0.9])
    data = Dataset(np.zeros(10), np.zeros(10, dtype=np.int64), "categorical")
    assert not pilot_then_allocate(model, data, (), pilot_repeats=3, budget=5.0)


def test_pilot_rejects_zero_repeats() -> None:
    model = CategoricalModel([0.5, 0.5])
    data = Dataset(np.zeros(2), np.array([0, 1]), "categorical")
    with pytest.raises(ValueError):
        pilot_then_allocate(model, data, (), pilot_repeats=0, budget=100.0)


def test_pilot_allocation_tracks_true_probabilities() -> None:
    """
    On orientation data most observed responses are likely ones, where the
    optimal repeats fall as the response probability rises.
    """
    model = OrientationModel()
    theta = ORIENTATION_BASELINE.as_vector()
    data = model.generate(200, theta, seed=3)
    p = np.exp(model.exact_trial_logliks(data.stimuli, data.responses, theta))
    budget = 20.0 * float(np.sum(1.0 / p))
    repeats = pilot_then_allocate(model, data, theta, pilot_repeats=100, budget=budget, seed=4).unwrap()
    rho, _ = stats.spearmanr(repeats, p)
    assert rho < -0.5
