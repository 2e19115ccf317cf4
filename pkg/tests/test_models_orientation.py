"""
Test suite for the orientation discrimination model.

@date: 18.10.2026
"""

import math

import numpy as np
import pytest
from invbinom import check_exact_loglik
from invbinom.models import (
    OrientationModel,
    PsychometricTheta,
    psychometric_exact_loglik,
    psychometric_generate,
    psychometric_prob_rightward,
)
from invbinom.models.orientation import BASELINE_THETA, RIGHTWARDS


def test_prob_at_bias_is_one_half() -> None:
    theta = PsychometricTheta(math.log(2.0), 0.4, 0.1)
    assert psychometric_prob_rightward(0.4, theta) == pytest.approx(0.5)


@pytest.mark.parametrize("s", [-8.0, 0.0, 3.0])
def test_full_lapse_is_a_coin(s: float) -> None:
    theta = PsychometricTheta(math.log(2.0), 0.1, 1.0)
    assert psychometric_prob_rightward(s, theta) == pytest.approx(0.5)


def test_lapse_bounds_the_curve() -> None:
    """
    Far from the bias the curve saturates at gamma / 2 and 1 - gamma / 2.
    """
    theta = PsychometricTheta(0.0, 0.0, 0.2)
    assert psychometric_prob_rightward(-50.0, theta) == pytest.approx(0.1)
    assert psychometric_prob_rightward(50.0, theta) == pytest.approx(0.9)


def test_simulated_frequency_matches_probability() -> None:
    model = OrientationModel()
    stimuli = np.full(100_000, 1.5)
    responses = model.simulate(stimuli, BASELINE_THETA.as_vector(), np.random.default_rng(0))
    p = psychometric_prob_rightward(1.5, BASELINE_THETA)
    assert set(np.unique(responses)) <= {0, 1}
    assert responses.mean() == pytest.approx(p, abs=4 * math.sqrt(p * (1 - p) / len(stimuli)))


def test_exact_loglik_matches_per_trial_formula() -> None:
    data = psychometric_generate(50, BASELINE_THETA, seed=3)
    expected = sum(
        math.log(
            psychometric_prob_rightward(s, BASELINE_THETA)
            if r == RIGHTWARDS
            else 1 - psychometric_prob_rightward(s, BASELINE_THETA)
        )
        for s, r in zip(data.stimuli, data.responses)
    )
    assert psychometric_exact_loglik(data, BASELINE_THETA) == pytest.approx(expected, rel=1e-12)


def test_generate_is_reproducible() -> None:
    first = psychometric_generate(30, BASELINE_THETA, seed=8)
    second = psychometric_generate(30, BASELINE_THETA, seed=8)
    np.testing.assert_array_equal(first.stimuli, second.stimuli)
    np.testing.assert_array_equal(first.responses, second.responses)
    assert first.model == "orientation"
    assert first.theta_true == tuple(BASELINE_THETA.as_vector())


def test_ibs_agrees_with_exact() -> None:
    model = OrientationModel()
    data = psychometric_generate(200, BASELINE_THETA, seed=1)
    z = check_exact_loglik(model, data, BASELINE_THETA.as_vector(), repeats=5, seed=2).unwrap()
    assert abs(z) < 5


def test_chance_loglik() -> None:
    data = psychometric_generate(10, BASELINE_THETA, seed=0)
    assert OrientationModel().chance_loglik(data) == pytest.approx(-10 * math.log(2))


def test_theta_vector_order() -> None:
    theta = PsychometricTheta.from_vector([0.5, -0.2, 0.05])
    assert (theta.eta, theta.mu, theta.gamma) == (0.5, -0.2, 0.05)
    assert theta.sigma == pytest.approx(math.exp(0.5))
    assert OrientationModel().parameter_space().names == ("eta", "mu", "gamma")
