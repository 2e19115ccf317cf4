"""
Orientation discrimination: the observer reports whether a patch is rotated
rightwards of a reference, from a Gaussian measurement of its orientation.

    Pr(rightwards | s, theta) = gamma / 2 + (1 - gamma) Phi((s - mu) / sigma)

with theta = (eta = log sigma, mu, gamma), angles in degrees.
Responses are coded 1 for rightwards and 0 for leftwards.

@date: 18.10.2026
"""

from __future__ import annotations

import math
from dataclasses import astuple, dataclass
from typing import Any, ClassVar, Final

import numpy as np
import numpy.typing as npt
from scipy import special

from .._special import normal_cdf
from ..dataset import Dataset
from ._base import LAPSE_FLOOR, Parameter, ParameterSpace, SimulatorModel

STIMULUS_SD_DEG: Final[float] = 3.0
RIGHTWARDS: Final[int] = 1
LEFTWARDS: Final[int] = 0

ORIENTATION_SPACE: Final = ParameterSpace(
    (
        Parameter("eta", math.log(0.1), math.log(10.0), math.log(0.1), math.log(5.0)),
        Parameter("mu", -2.0, 2.0, -1.0, 1.0),
        Parameter("gamma", LAPSE_FLOOR, 1.0, LAPSE_FLOOR, 0.2, transform="logit"),
    )
)


@dataclass(frozen=True)
class PsychometricTheta:
    eta: float
    mu: float
    gamma: float

    @property
    def sigma(self) -> float:
        return math.exp(self.eta)

    @classmethod
    def from_vector(cls, theta: npt.ArrayLike) -> PsychometricTheta:
        eta, mu, gamma = np.asarray(theta, dtype=np.float64)
        return cls(float(eta), float(mu), float(gamma))

    def as_vector(self) -> npt.NDArray[np.float64]:
        return np.array(astuple(self))


BASELINE_THETA: Final = PsychometricTheta(math.log(2.0), 0.1, 0.1)


def psychometric_prob_rightward(s: float, theta: PsychometricTheta) -> float:
    return theta.gamma / 2.0 + (1.0 - theta.gamma) * normal_cdf((s - theta.mu) / theta.sigma)


def _prob_rightward(
    stimuli: npt.NDArray[np.float64], theta: PsychometricTheta
) -> npt.NDArray[np.float64]:
    return theta.gamma / 2.0 + (1.0 - theta.gamma) * special.ndtr(
        (stimuli - theta.mu) / theta.sigma
    )


class OrientationModel(SimulatorModel):
    name: ClassVar[str] = "orientation"
    default_trials: ClassVar[int] = 600

    def parameter_space(self) -> ParameterSpace:
        return ORIENTATION_SPACE

    def response_space(self, stimulus: Any) -> tuple[int, ...]:
        return (LEFTWARDS, RIGHTWARDS)

    def sample_stimuli(self, n: int, rng: np.random.Generator) -> npt.NDArray[np.float64]:
        return rng.normal(0.0, STIMULUS_SD_DEG, size=n)

    def simulate(
        self,
        stimuli: npt.NDArray[np.float64],
        theta: npt.NDArray[np.float64],
        rng: np.random.Generator,
    ) -> npt.NDArray[np.int64]:
        params = PsychometricTheta.from_vector(theta)
        n = len(stimuli)
        measurement = stimuli + params.sigma * rng.standard_normal(n)
        lapse = rng.random(n) < params.gamma
        guess = rng.random(n) < 0.5
        rightwards = np.where(lapse, guess, measurement > params.mu)
        return rightwards.astype(np.int64)

    def exact_trial_logliks(
        self,
        stimuli: npt.NDArray[np.float64],
        responses: npt.NDArray[np.int64],
        theta: npt.NDArray[np.float64],
    ) -> npt.NDArray[np.float64]:
        p_right = _prob_rightward(
            np.asarray(stimuli, dtype=np.float64), PsychometricTheta.from_vector(theta)
        )
        return np.log(np.where(responses == RIGHTWARDS, p_right, 1.0 - p_right))

    def chance_loglik(self, data: Dataset) -> float:
        return -data.n_trials * math.log(2.0)


def psychometric_generate(n: int, theta: PsychometricTheta, seed: int) -> Dataset:
    return OrientationModel().generate(n, theta.as_vector(), seed)


def psychometric_exact_loglik(data: Dataset, theta: PsychometricTheta) -> float:
    return OrientationModel().exact_loglik(data, theta.as_vector()).unwrap()
