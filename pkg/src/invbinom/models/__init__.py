"""
Simulator models and the registry of the three reference experiments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Final

import numpy as np
import numpy.typing as npt

from .._checks import ConfigError
from .._results import Err, Ok, Result
from ._base import (
    CONTINUOUS,
    LAPSE_FLOOR,
    Continuous,
    Parameter,
    ParameterSpace,
    SimulatorModel,
    theta_grid,
)
from .changeloc import (
    ChangeLocModel,
    ChangeLocTheta,
    changeloc_exact_loglik,
    changeloc_generate,
    changeloc_p_correct,
    changeloc_simulate,
)
from .changeloc import BASELINE_THETA as CHANGELOC_BASELINE
from .fourinarow import (
    Board,
    FourInARowModel,
    FourInARowTheta,
    fourinarow_features,
    fourinarow_generate_positions,
    fourinarow_simulate,
    fourinarow_value,
)
from .fourinarow import BASELINE_THETA as FOURINAROW_BASELINE
from .orientation import (
    OrientationModel,
    PsychometricTheta,
    psychometric_exact_loglik,
    psychometric_generate,
    psychometric_prob_rightward,
)
from .orientation import BASELINE_THETA as ORIENTATION_BASELINE
from .toy import CategoricalModel, GaussianResponseModel, UniformResponseModel


@dataclass(frozen=True)
class ModelEntry:
    """
    Defaults of a reference experiment.

    Attributes
    ----------
    factory: Callable[[], SimulatorModel]
        Builds the simulator.
    baseline: np.ndarray
        Parameter vector the generation grids vary around.
    n_trials: int
        Trials per synthetic dataset.
    chance_per_trial: float
        Log-likelihood per trial of the chance model, the early-stopping floor.
    """

    factory: Callable[[], SimulatorModel]
    baseline: npt.NDArray[np.float64]
    n_trials: int
    chance_per_trial: float

    def threshold(self, n_trials: int) -> float:
        return n_trials * self.chance_per_trial


MODEL_REGISTRY: Final[dict[str, ModelEntry]] = {
    "orientation": ModelEntry(OrientationModel, ORIENTATION_BASELINE.as_vector(), 600, -math.log(2.0)),
    "changeloc": ModelEntry(ChangeLocModel, CHANGELOC_BASELINE.as_vector(), 400, -math.log(6.0)),
    "fourinarow": ModelEntry(FourInARowModel, FOURINAROW_BASELINE.as_vector(), 100, -math.log(20.0)),
}


def get_entry(name: str) -> Result[ModelEntry, ConfigError]:
    try:
        return Ok(MODEL_REGISTRY[name])
    except KeyError:
        return Err(ConfigError("model", f"unknown model {name!r}, expected one of {sorted(MODEL_REGISTRY)}"))


def get_model(name: str) -> Result[SimulatorModel, ConfigError]:
    """
    Instantiates a registered model by name; also serves as the codec
    lookup when reading dataset files.
    """
    return get_entry(name).map(lambda entry: entry.factory())


__all__ = [
    "CONTINUOUS",
    "LAPSE_FLOOR",
    "MODEL_REGISTRY",
    "Board",
    "CategoricalModel",
    "ChangeLocModel",
    "ChangeLocTheta",
    "Continuous",
    "FourInARowModel",
    "FourInARowTheta",
    "GaussianResponseModel",
    "ModelEntry",
    "OrientationModel",
    "Parameter",
    "ParameterSpace",
    "PsychometricTheta",
    "SimulatorModel",
    "UniformResponseModel",
    "changeloc_exact_loglik",
    "changeloc_generate",
    "changeloc_p_correct",
    "changeloc_simulate",
    "fourinarow_features",
    "fourinarow_generate_positions",
    "fourinarow_simulate",
    "fourinarow_value",
    "get_entry",
    "get_model",
    "psychometric_exact_loglik",
    "psychometric_generate",
    "psychometric_prob_rightward",
    "theta_grid",
]
