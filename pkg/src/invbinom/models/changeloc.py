"""
Change localization: six oriented patches are shown twice, exactly one of
them rotated in between, and the observer reports which one changed.

Each of the twelve orientations is measured with von Mises noise of
concentration kappa = exp(-2 eta); the observer picks the patch with the
largest absolute circular difference between its two measurements, or
with probability gamma guesses uniformly.

A stimulus is a row of 12 orientations in degrees on the full circle (the
six first-display orientations, then the six second-display ones);
responses are patch numbers 1..6.

@date: 18.10.2026
"""

from __future__ import annotations

import math
from dataclasses import astuple, dataclass
from typing import Any, ClassVar, Final, Sequence

import numpy as np
import numpy.typing as npt
from scipy.integrate import trapezoid

from .._special import CIRCULAR_GRID_POINTS, circular_distance_density, circular_distance_grid
from ..dataset import Dataset
from ._base import LAPSE_FLOOR, Parameter, ParameterSpace, SimulatorModel

N_PATCHES: Final[int] = 6
CHANGE_KAPPA: Final[float] = 1.0

CHANGELOC_SPACE: Final = ParameterSpace(
    (
        Parameter("eta", math.log(0.05), math.log(2.0), math.log(0.1), math.log(1.0)),
        Parameter("gamma", LAPSE_FLOOR, 1.0, LAPSE_FLOOR, 0.5, transform="logit"),
    )
)


@dataclass(frozen=True)
class ChangeLocTheta:
    eta: float
    gamma: float

    @property
    def kappa(self) -> float:
        return math.exp(-2.0 * self.eta)

    @classmethod
    def from_vector(cls, theta: npt.ArrayLike) -> ChangeLocTheta:
        eta, gamma = np.asarray(theta, dtype=np.float64)
        return cls(float(eta), float(gamma))

    def as_vector(self) -> npt.NDArray[np.float64]:
        return np.array(astuple(self))


BASELINE_THETA: Final = ChangeLocTheta(math.log(0.3), 0.03)


def _wrap(radians: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
    """
    Maps angles onto (-pi, pi].
    """
    return np.angle(np.exp(1j * radians))


def change_magnitudes(stimuli: npt.NDArray[np.float64]) -> tuple[npt.NDArray[np.int64], npt.NDArray[np.float64]]:
    """
    Returns
    -------
    tuple
        (index 0..5 of the changed patch, absolute change in radians) for
        each stimulus row. With no change at all the first patch is reported.
    """
    stimuli = np.atleast_2d(np.asarray(stimuli, dtype=np.float64))
    diff = np.abs(_wrap(np.deg2rad(stimuli[:, N_PATCHES:] - stimuli[:, :N_PATCHES])))
    changed = np.argmax(diff, axis=1)
    return changed, diff[np.arange(len(diff)), changed]


def _p_correct(delta_s: npt.NDArray[np.float64], theta: ChangeLocTheta) -> npt.NDArray[np.float64]:
    """
    gamma / 6 + (1 - gamma) int pdf(dx | delta_s) cdf(dx)^5 ddx, by
    trapezoid on a fixed grid over [0, pi]; `delta_s` in radians.
    """
    grid, _, cumulative = circular_distance_grid(theta.kappa, CIRCULAR_GRID_POINTS)
    shifted = circular_distance_density(grid[None, :], theta.kappa, shift=delta_s[:, None])
    mass = trapezoid(shifted, grid, axis=1)
    winning = trapezoid(shifted * cumulative[None, :] ** (N_PATCHES - 1), grid, axis=1) / mass
    return theta.gamma / N_PATCHES + (1.0 - theta.gamma) * winning


def changeloc_p_correct(delta_s: float, theta: ChangeLocTheta) -> float:
    """
    Probability of reporting the changed patch for a change of `delta_s`
    degrees.
    """
    delta = abs(float(_wrap(np.asarray(math.radians(delta_s)))))
    return float(_p_correct(np.array([delta]), theta)[0])


class ChangeLocModel(SimulatorModel):
    name: ClassVar[str] = "changeloc"
    default_trials: ClassVar[int] = 400

    def parameter_space(self) -> ParameterSpace:
        return CHANGELOC_SPACE

    def response_space(self, stimulus: Any) -> tuple[int, ...]:
        return tuple(range(1, N_PATCHES + 1))

    def stack_stimuli(self, items: Sequence[Any]) -> npt.NDArray[np.float64]:
        return np.asarray(items, dtype=np.float64).reshape(-1, 2 * N_PATCHES)

    def sample_stimuli(self, n: int, rng: np.random.Generator) -> npt.NDArray[np.float64]:
        first = rng.uniform(0.0, 360.0, size=(n, N_PATCHES))
        change = np.rad2deg(rng.vonmises(0.0, CHANGE_KAPPA, size=n))
        changed = rng.integers(N_PATCHES, size=n)
        second = first.copy()
        second[np.arange(n), changed] = np.mod(second[np.arange(n), changed] + change, 360.0)
        return np.concatenate([first, second], axis=1)

    def simulate(
        self,
        stimuli: npt.NDArray[np.float64],
        theta: npt.NDArray[np.float64],
        rng: np.random.Generator,
    ) -> npt.NDArray[np.int64]:
        params = ChangeLocTheta.from_vector(theta)
        stimuli = self.stack_stimuli(stimuli)
        n = len(stimuli)
        measured = np.deg2rad(stimuli) + rng.vonmises(0.0, params.kappa, size=stimuli.shape)
        diff = np.abs(_wrap(measured[:, N_PATCHES:] - measured[:, :N_PATCHES]))
        chosen = np.argmax(diff, axis=1)
        lapse = rng.random(n) < params.gamma
        guess = rng.integers(N_PATCHES, size=n)
        return np.where(lapse, guess, chosen).astype(np.int64) + 1

    def exact_trial_logliks(
        self,
        stimuli: npt.NDArray[np.float64],
        responses: npt.NDArray[np.int64],
        theta: npt.NDArray[np.float64],
    ) -> npt.NDArray[np.float64]:
        changed, delta = change_magnitudes(self.stack_stimuli(stimuli))
        p_correct = _p_correct(delta, ChangeLocTheta.from_vector(theta))
        correct = np.asarray(responses) == changed + 1
        return np.log(np.where(correct, p_correct, (1.0 - p_correct) / (N_PATCHES - 1)))

    def chance_loglik(self, data: Dataset) -> float:
        return -data.n_trials * math.log(N_PATCHES)


def changeloc_simulate(
    stimulus: npt.ArrayLike, theta: ChangeLocTheta, rng: np.random.Generator
) -> int:
    return int(ChangeLocModel().simulate_one(np.asarray(stimulus), theta.as_vector(), rng))


def changeloc_generate(n: int, theta: ChangeLocTheta, seed: int) -> Dataset:
    return ChangeLocModel().generate(n, theta.as_vector(), seed)


def changeloc_exact_loglik(data: Dataset, theta: ChangeLocTheta) -> float:
    return ChangeLocModel().exact_loglik(data, theta.as_vector()).unwrap()
