"""
The simulator abstraction shared by all models, and bounded parameter spaces.

A model is a stochastic generator of responses given a stimulus and a
parameter vector. Simulation is batched: `simulate` receives an array of
stimuli (one per trial to sample) and returns one response for each.
Models with a tractable likelihood also implement `exact_trial_logliks`.

@date: 18.10.2026
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, ClassVar, Final, Iterator, Literal, Sequence

import numpy as np
import numpy.typing as npt

from .._checks import ConfigError, NoExactLikelihood
from .._results import Err, Ok, Result
from ..dataset import Dataset

# Smallest lapse rate any model accepts
LAPSE_FLOOR: Final[float] = 0.01


class Continuous:
    """
    Marker for a continuous response space.
    """

    def __repr__(self) -> str:
        return "Continuous()"


CONTINUOUS: Final = Continuous()


@dataclass(frozen=True)
class Parameter:
    """
    A bounded model parameter.

    Attributes
    ----------
    lb, ub: float
        Hard bounds.
    plb, pub: float
        Plausible bounds, used to place starting points and generation grids.
    transform: str
        'linear' or 'logit'; how the optimizer represents the parameter.
    """

    name: str
    lb: float
    ub: float
    plb: float
    pub: float
    transform: Literal["linear", "logit"] = "linear"

    def __post_init__(self) -> None:
        if not (
            math.isfinite(self.lb)
            and math.isfinite(self.ub)
            and self.lb <= self.plb < self.pub <= self.ub
        ):
            raise ValueError(f"Inconsistent bounds for parameter {self.name}")


@dataclass(frozen=True)
class ParameterSpace:
    parameters: tuple[Parameter, ...]

    def __len__(self) -> int:
        return len(self.parameters)

    def __iter__(self) -> Iterator[Parameter]:
        return iter(self.parameters)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.parameters)

    @property
    def lower(self) -> npt.NDArray[np.float64]:
        return np.array([p.lb for p in self.parameters])

    @property
    def upper(self) -> npt.NDArray[np.float64]:
        return np.array([p.ub for p in self.parameters])

    @property
    def plausible_lower(self) -> npt.NDArray[np.float64]:
        return np.array([p.plb for p in self.parameters])

    @property
    def plausible_upper(self) -> npt.NDArray[np.float64]:
        return np.array([p.pub for p in self.parameters])

    def index(self, name: str) -> int:
        return self.names.index(name)

    def contains(self, theta: npt.ArrayLike) -> bool:
        theta = np.asarray(theta, dtype=np.float64)
        return bool(
            theta.shape == (len(self),)
            and np.all(theta >= self.lower)
            and np.all(theta <= self.upper)
        )

    def validate(self, theta: Sequence[float]) -> Result[npt.NDArray[np.float64], ConfigError]:
        """
        Returns Ok(theta as an array) if it has the right size and lies
        within the hard bounds.
        """
        values = np.asarray(theta, dtype=np.float64)
        if values.shape != (len(self),):
            return Err(ConfigError("theta", f"expected {len(self)} values, got {values.size}"))
        for value, p in zip(values, self.parameters):
            if not p.lb <= value <= p.ub:
                return Err(ConfigError(p.name, f"{value} outside [{p.lb}, {p.ub}]"))
        return Ok(values)

    def clip(self, theta: npt.ArrayLike) -> npt.NDArray[np.float64]:
        return np.clip(np.asarray(theta, dtype=np.float64), self.lower, self.upper)


def theta_grid(
    space: ParameterSpace, baseline: npt.ArrayLike, increments: int = 40
) -> npt.NDArray[np.float64]:
    """
    One-at-a-time generation grid: each parameter in turn is varied linearly
    in `increments` steps from its plausible lower to upper bound, the
    others staying at `baseline`.

    Returns
    -------
    np.ndarray
        Array of shape (len(space) * increments, len(space)).
    """
    baseline = np.asarray(baseline, dtype=np.float64)
    rows = []
    for j, p in enumerate(space):
        for value in np.linspace(p.plb, p.pub, increments):
            theta = baseline.copy()
            theta[j] = value
            rows.append(theta)
    return np.array(rows)


class SimulatorModel(ABC):
    """
    Base class for simulator models.

    Class parameters
    ----------------
    name: str
        Registry name, also written into dataset headers.
    thread_safe: bool
        Whether `simulate` can run concurrently with independent streams.
        The engine runs serial models on a single worker.
    """

    name: ClassVar[str]
    thread_safe: ClassVar[bool] = True
    default_trials: ClassVar[int] = 100

    @abstractmethod
    def parameter_space(self) -> ParameterSpace: ...

    @abstractmethod
    def simulate(
        self, stimuli: npt.NDArray[Any], theta: npt.NDArray[np.float64], rng: np.random.Generator
    ) -> npt.NDArray[Any]:
        """
        Draws one response per stimulus.
        """

    @abstractmethod
    def sample_stimuli(self, n: int, rng: np.random.Generator) -> npt.NDArray[Any]:
        """
        Draws `n` stimuli from the experiment's stimulus distribution.
        """

    @abstractmethod
    def response_space(self, stimulus: Any) -> tuple[Any, ...] | Continuous: ...

    def matches(
        self, simulated: npt.NDArray[Any], observed: npt.NDArray[Any]
    ) -> npt.NDArray[np.bool_]:
        """
        Hit mask between simulated and observed responses.
        """
        return np.asarray(simulated == observed, dtype=np.bool_)

    def exact_trial_logliks(
        self, stimuli: npt.NDArray[Any], responses: npt.NDArray[Any], theta: npt.NDArray[np.float64]
    ) -> npt.NDArray[np.float64] | None:
        """
        Per-trial exact log-likelihoods, or None for simulator-only models.
        """
        return None

    @property
    def has_exact_likelihood(self) -> bool:
        return type(self).exact_trial_logliks is not SimulatorModel.exact_trial_logliks

    def chance_loglik(self, data: Dataset) -> float:
        """
        Log-likelihood of a model guessing uniformly over the responses;
        the default early-stopping threshold.
        """
        total = 0.0
        for stimulus in data.stimuli:
            space = self.response_space(stimulus)
            if isinstance(space, Continuous):
                raise NotImplementedError("No chance model for continuous responses")
            total -= math.log(len(space))
        return total

    # --- derived operations --- #

    def stack_stimuli(self, items: Sequence[Any]) -> npt.NDArray[Any]:
        """
        Builds the stimulus array of the model from individual stimuli.
        """
        return np.asarray(items, dtype=np.float64)

    def simulate_one(
        self, stimulus: Any, theta: npt.NDArray[np.float64], rng: np.random.Generator
    ) -> Any:
        return self.simulate(self.stack_stimuli([stimulus]), np.asarray(theta), rng)[0]

    def exact_trial_loglik(
        self, stimulus: Any, response: Any, theta: npt.NDArray[np.float64]
    ) -> float | None:
        result = self.exact_trial_logliks(
            self.stack_stimuli([stimulus]), np.array([response]), np.asarray(theta, dtype=np.float64)
        )
        return None if result is None else float(result[0])

    def exact_loglik(
        self, data: Dataset, theta: npt.ArrayLike
    ) -> Result[float, NoExactLikelihood]:
        logliks = self.exact_trial_logliks(
            data.stimuli, data.responses, np.asarray(theta, dtype=np.float64)
        )
        if logliks is None:
            return Err(NoExactLikelihood(self.name))
        return Ok(float(np.sum(logliks)))

    def generate(self, n: int, theta: npt.ArrayLike, seed: int) -> Dataset:
        """
        Simulates a dataset of `n` trials at `theta`, reproducibly from `seed`.
        """
        theta = np.asarray(theta, dtype=np.float64)
        rng = np.random.default_rng(seed)
        stimuli = self.sample_stimuli(n, rng)
        responses = self.simulate(stimuli, theta, rng)
        return Dataset(stimuli, responses, self.name, tuple(float(t) for t in theta), seed)

    # --- codec, overridden by models with structured stimuli --- #

    def encode_stimulus(self, stimulus: Any) -> Any:
        return stimulus.tolist() if isinstance(stimulus, np.ndarray) else float(stimulus)

    def decode_stimuli(self, encoded: list[Any]) -> npt.NDArray[Any]:
        return self.stack_stimuli(encoded)

    def encode_response(self, response: Any) -> Any:
        return int(response)

    def decode_responses(self, encoded: list[Any]) -> npt.NDArray[Any]:
        return np.array(encoded, dtype=np.int64)
