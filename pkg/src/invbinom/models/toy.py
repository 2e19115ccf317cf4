"""
Small models with known likelihoods: a stimulus-free categorical source,
and continuous-response simulators for approximate matching.

@date: 18.10.2026
"""

from __future__ import annotations

import math
from typing import Any, ClassVar

import numpy as np
import numpy.typing as npt
from scipy import special

from .._checks import ContractViolation
from ._base import CONTINUOUS, Continuous, Parameter, ParameterSpace, SimulatorModel


class CategoricalModel(SimulatorModel):
    """
    Draws response k with probability `probs[k]` whatever the stimulus.
    It has no free parameter; pass an empty theta.
    """

    name: ClassVar[str] = "categorical"

    def __init__(self, probs: npt.ArrayLike) -> None:
        probs = np.asarray(probs, dtype=np.float64)
        if probs.ndim != 1 or probs.size == 0 or np.any(probs < 0) or not math.isclose(probs.sum(), 1.0):
            ContractViolation("CategoricalModel", f"not a distribution: {probs}").throw()
        self.probs = probs

    def parameter_space(self) -> ParameterSpace:
        return ParameterSpace(())

    def response_space(self, stimulus: Any) -> tuple[int, ...]:
        return tuple(range(len(self.probs)))

    def sample_stimuli(self, n: int, rng: np.random.Generator) -> npt.NDArray[np.float64]:
        return np.zeros(n)

    def simulate(
        self, stimuli: npt.NDArray[Any], theta: npt.NDArray[np.float64], rng: np.random.Generator
    ) -> npt.NDArray[np.int64]:
        return rng.choice(len(self.probs), size=len(stimuli), p=self.probs).astype(np.int64)

    def exact_trial_logliks(
        self, stimuli: npt.NDArray[Any], responses: npt.NDArray[Any], theta: npt.NDArray[np.float64]
    ) -> npt.NDArray[np.float64]:
        with np.errstate(divide="ignore"):
            return np.log(self.probs[np.asarray(responses, dtype=np.int64)])

    def entropy(self) -> float:
        return float(special.entr(self.probs).sum())

    def cross_entropy(self, other: CategoricalModel) -> float:
        """
        H(self, other) = -sum_x p(x) log q(x).
        """
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(self.probs > 0, -self.probs * np.log(other.probs), 0.0)
        return float(terms.sum())


class GaussianResponseModel(SimulatorModel):
    """
    Continuous responses r = s + mu + sigma * eps, eps ~ N(0, 1), with
    theta = (mu, eta = log sigma).
    """

    name: ClassVar[str] = "gaussian"

    def parameter_space(self) -> ParameterSpace:
        return ParameterSpace(
            (
                Parameter("mu", -5.0, 5.0, -1.0, 1.0),
                Parameter("eta", math.log(0.01), math.log(10.0), math.log(0.1), math.log(2.0)),
            )
        )

    def response_space(self, stimulus: Any) -> Continuous:
        return CONTINUOUS

    def sample_stimuli(self, n: int, rng: np.random.Generator) -> npt.NDArray[np.float64]:
        return rng.normal(0.0, 1.0, size=n)

    def simulate(
        self,
        stimuli: npt.NDArray[np.float64],
        theta: npt.NDArray[np.float64],
        rng: np.random.Generator,
    ) -> npt.NDArray[np.float64]:
        mu, eta = theta
        return stimuli + mu + math.exp(eta) * rng.standard_normal(len(stimuli))

    def ball_logprob(
        self,
        stimuli: npt.NDArray[np.float64],
        responses: npt.NDArray[np.float64],
        theta: npt.NDArray[np.float64],
        epsilon: float,
    ) -> npt.NDArray[np.float64]:
        """
        log Pr(|r~ - r| <= epsilon) for each trial.
        """
        mu, eta = theta
        centre = np.asarray(stimuli) + mu
        sigma = math.exp(eta)
        upper = special.ndtr((responses + epsilon - centre) / sigma)
        lower = special.ndtr((responses - epsilon - centre) / sigma)
        return np.log(upper - lower)

    def exact_trial_logliks(
        self,
        stimuli: npt.NDArray[np.float64],
        responses: npt.NDArray[np.float64],
        theta: npt.NDArray[np.float64],
    ) -> npt.NDArray[np.float64]:
        # densities, not probabilities
        mu, eta = theta
        sigma = math.exp(eta)
        z = (np.asarray(responses) - np.asarray(stimuli) - mu) / sigma
        return -0.5 * z**2 - math.log(sigma) - 0.5 * math.log(2.0 * math.pi)

    def encode_response(self, response: Any) -> float:
        return float(response)

    def decode_responses(self, encoded: list[Any]) -> npt.NDArray[np.float64]:
        return np.array(encoded, dtype=np.float64)


class UniformResponseModel(GaussianResponseModel):
    """
    Continuous responses drawn uniformly on [low, high], ignoring stimulus
    and theta.
    """

    name: ClassVar[str] = "uniform"

    def __init__(self, low: float = 0.0, high: float = 1.0) -> None:
        if not low < high:
            ContractViolation("UniformResponseModel", f"[{low}, {high}] is empty").throw()
        self.low = low
        self.high = high

    def parameter_space(self) -> ParameterSpace:
        return ParameterSpace(())

    def simulate(
        self,
        stimuli: npt.NDArray[np.float64],
        theta: npt.NDArray[np.float64],
        rng: np.random.Generator,
    ) -> npt.NDArray[np.float64]:
        return rng.uniform(self.low, self.high, size=len(stimuli))

    def ball_logprob(
        self,
        stimuli: npt.NDArray[np.float64],
        responses: npt.NDArray[np.float64],
        theta: npt.NDArray[np.float64],
        epsilon: float,
    ) -> npt.NDArray[np.float64]:
        responses = np.asarray(responses, dtype=np.float64)
        overlap = np.minimum(responses + epsilon, self.high) - np.maximum(responses - epsilon, self.low)
        return np.log(overlap / (self.high - self.low))

    def exact_trial_logliks(
        self,
        stimuli: npt.NDArray[np.float64],
        responses: npt.NDArray[np.float64],
        theta: npt.NDArray[np.float64],
    ) -> npt.NDArray[np.float64]:
        responses = np.asarray(responses, dtype=np.float64)
        inside = (responses >= self.low) & (responses <= self.high)
        return np.where(inside, -math.log(self.high - self.low), -np.inf)
