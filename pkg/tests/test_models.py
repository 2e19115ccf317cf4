"""
Test suite for the model registry, parameter spaces and toy models.

@date: 18.10.2026
"""

import math

import numpy as np
import pytest
from invbinom import ConfigError, Err
from invbinom.models import (
    MODEL_REGISTRY,
    CategoricalModel,
    GaussianResponseModel,
    Parameter,
    ParameterSpace,
    UniformResponseModel,
    get_entry,
    get_model,
    theta_grid,
)


@pytest.mark.parametrize("name", sorted(MODEL_REGISTRY))
def test_registry(name: str) -> None:
    entry = get_entry(name).unwrap()
    model = get_model(name).unwrap()
    assert model.name == name
    space = model.parameter_space()
    assert entry.baseline.shape == (len(space),)
    assert space.contains(entry.baseline)
    assert entry.threshold(10) == pytest.approx(10 * entry.chance_per_trial)


def test_unknown_model() -> None:
    match get_model("nosuchmodel"):
        case Err(ConfigError(key=key)):
            assert key == "model"
        case other:
            assert False, f"unexpected {other}"


def test_parameter_bounds_are_checked() -> None:
    with pytest.raises(ValueError):
        Parameter("x", 0.0, 1.0, 0.5, 0.2)


def test_parameter_space_validate() -> None:
    space = ParameterSpace((Parameter("a", 0.0, 1.0, 0.1, 0.9), Parameter("b", -1.0, 1.0, -0.5, 0.5)))
    assert space.validate([0.5, 0.0]).unwrap().tolist() == [0.5, 0.0]
    match space.validate([0.5, 2.0]):
        case Err(ConfigError(key=key)):
            assert key == "b"
        case other:
            assert False, f"unexpected {other}"
    assert not space.validate([0.5])
    np.testing.assert_array_equal(space.clip([2.0, -3.0]), [1.0, -1.0])


def test_theta_grid_varies_one_parameter_at_a_time() -> None:
    space = ParameterSpace((Parameter("a", 0.0, 1.0, 0.1, 0.9), Parameter("b", -1.0, 1.0, -0.5, 0.5)))
    grid = theta_grid(space, [0.5, 0.0], increments=5)
    assert grid.shape == (10, 2)
    np.testing.assert_allclose(grid[:5, 0], np.linspace(0.1, 0.9, 5))
    assert np.all(grid[:5, 1] == 0.0)
    assert np.all(grid[5:, 0] == 0.5)


def test_categorical_model() -> None:
    model = CategoricalModel([0.5, 0.25, 0.25])
    assert model.entropy() == pytest.approx(1.5 * math.log(2))
    assert model.cross_entropy(model) == pytest.approx(model.entropy())
    draws = model.simulate(np.zeros(100_000), np.array([]), np.random.default_rng(0))
    assert np.mean(draws == 0) == pytest.approx(0.5, abs=0.01)
    with pytest.raises(ValueError):
        CategoricalModel([0.5, 0.6])


def test_gaussian_ball_probability() -> None:
    model = GaussianResponseModel()
    theta = np.array([0.0, 0.0])
    logprob = model.ball_logprob(np.array([0.0]), np.array([0.0]), theta, 1.0)
    assert math.exp(logprob[0]) == pytest.approx(0.6826895, abs=1e-6)
    density = model.exact_trial_logliks(np.array([0.0]), np.array([0.0]), theta)
    assert density[0] == pytest.approx(-0.5 * math.log(2 * math.pi))


def test_uniform_model() -> None:
    model = UniformResponseModel(0.0, 2.0)
    draws = model.simulate(np.zeros(1000), np.array([]), np.random.default_rng(1))
    assert draws.min() >= 0.0 and draws.max() <= 2.0
    logprob = model.ball_logprob(np.array([0.0]), np.array([1.9]), np.array([]), 0.2)
    assert math.exp(logprob[0]) == pytest.approx(0.15)
    with pytest.raises(ValueError):
        UniformResponseModel(1.0, 1.0)
