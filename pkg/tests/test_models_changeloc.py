"""
Test suite for the change localization model.

@date: 18.10.2026
"""

import math

import numpy as np
import pytest
from scipy import stats
from invbinom import check_exact_loglik
from invbinom.models import (
    ChangeLocModel,
    ChangeLocTheta,
    changeloc_exact_loglik,
    changeloc_generate,
    changeloc_p_correct,
    changeloc_simulate,
)
from invbinom.models.changeloc import BASELINE_THETA, N_PATCHES, change_magnitudes


def stimulus(changed: int, change_deg: float) -> np.ndarray:
    first = np.arange(N_PATCHES) * 55.0 + 10.0
    second = first.copy()
    second[changed] = (second[changed] + change_deg) % 360.0
    return np.concatenate([first, second])


def test_change_magnitudes() -> None:
    changed, delta = change_magnitudes(stimulus(3, 40.0))
    assert changed.tolist() == [3]
    assert delta[0] == pytest.approx(math.radians(40.0))


def test_change_wraps_around_the_circle() -> None:
    _, delta = change_magnitudes(stimulus(0, 350.0))
    assert delta[0] == pytest.approx(math.radians(10.0))


def test_no_change_is_chance() -> None:
    """
    Without a change all six patches are exchangeable.
    """
    theta = ChangeLocTheta(math.log(0.3), 0.01)
    assert changeloc_p_correct(0.0, theta) == pytest.approx(1 / 6, abs=2e-3)


def test_full_lapse_is_chance() -> None:
    theta = ChangeLocTheta(math.log(0.3), 1.0)
    assert changeloc_p_correct(60.0, theta) == pytest.approx(1 / 6)


def test_full_lapse_responses_are_uniform() -> None:
    model = ChangeLocModel()
    rng = np.random.default_rng(8)
    stimuli = model.sample_stimuli(100_000, rng)
    responses = model.simulate(stimuli, ChangeLocTheta(math.log(0.3), 1.0).as_vector(), rng)
    counts = np.bincount(responses, minlength=N_PATCHES + 1)[1:]
    assert counts.sum() == len(stimuli)
    assert stats.chisquare(counts).pvalue > 1e-3


def test_changed_patch_is_uniform() -> None:
    stimuli = ChangeLocModel().sample_stimuli(100_000, np.random.default_rng(9))
    changed, _ = change_magnitudes(stimuli)
    assert stats.chisquare(np.bincount(changed, minlength=N_PATCHES)).pvalue > 1e-3


def test_p_correct_grows_with_change() -> None:
    values = [changeloc_p_correct(d, BASELINE_THETA) for d in (5.0, 20.0, 45.0, 90.0, 170.0)]
    assert all(a < b for a, b in zip(values, values[1:]))
    assert values[-1] < 1.0 - BASELINE_THETA.gamma * 5 / 6 + 1e-9


@pytest.mark.parametrize("change_deg", [15.0, 40.0])
def test_simulated_frequency_matches_p_correct(change_deg: float) -> None:
    model = ChangeLocModel()
    stimuli = np.repeat(stimulus(2, change_deg)[None, :], 50_000, axis=0)
    responses = model.simulate(stimuli, BASELINE_THETA.as_vector(), np.random.default_rng(4))
    p = changeloc_p_correct(change_deg, BASELINE_THETA)
    assert responses.min() >= 1 and responses.max() <= N_PATCHES
    frequency = float(np.mean(responses == 3))
    assert frequency == pytest.approx(p, abs=4 * math.sqrt(p * (1 - p) / len(stimuli)) + 2e-3)


def test_exact_loglik_spreads_errors_evenly() -> None:
    model = ChangeLocModel()
    s = stimulus(1, 30.0)
    p = changeloc_p_correct(30.0, BASELINE_THETA)
    theta = BASELINE_THETA.as_vector()
    assert model.exact_trial_loglik(s, 2, theta) == pytest.approx(math.log(p), rel=1e-9)
    for wrong in (1, 3, 4, 5, 6):
        assert model.exact_trial_loglik(s, wrong, theta) == pytest.approx(math.log((1 - p) / 5), rel=1e-9)


def test_simulate_single_stimulus() -> None:
    response = changeloc_simulate(stimulus(0, 90.0), BASELINE_THETA, np.random.default_rng(0))
    assert 1 <= response <= N_PATCHES


def test_generated_stimuli_change_one_patch() -> None:
    data = changeloc_generate(100, BASELINE_THETA, seed=2)
    assert data.stimuli.shape == (100, 2 * N_PATCHES)
    moved = np.sum(~np.isclose(data.stimuli[:, :N_PATCHES], data.stimuli[:, N_PATCHES:]), axis=1)
    assert np.all(moved <= 1)


def test_ibs_agrees_with_exact() -> None:
    model = ChangeLocModel()
    data = changeloc_generate(100, BASELINE_THETA, seed=5)
    z = check_exact_loglik(model, data, BASELINE_THETA.as_vector(), repeats=5, seed=6).unwrap()
    assert abs(z) < 5
    assert changeloc_exact_loglik(data, BASELINE_THETA) > model.chance_loglik(data)
