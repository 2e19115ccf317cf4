"""
Concrete error types of the package, and railway-style validators
for the arguments that estimators and configs receive.

Exceptional errors (DomainError, ContractViolation) are meant to be thrown,
the others travel as `Err` values.

@date: 18.10.2026
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import ClassVar

from ._errors import Error
from ._results import Err, Ok, Result


@dataclass
class DomainError(Error):
    """
    A special function or formula evaluated outside of its domain.
    """

    exception_cls: ClassVar[type[Exception]] = ValueError
    description: ClassVar[str | None] = "{function} is undefined for {argument}"
    function: str
    argument: object


@dataclass
class ContractViolation(Error):
    """
    A caller broke the precondition of an operation.
    """

    exception_cls: ClassVar[type[Exception]] = ValueError
    description: ClassVar[str | None] = "{operation}: {reason}"
    operation: str
    reason: str


@dataclass
class SampleCapReached(Error):
    """
    Truncation signal: a trial used `samples` draws without a hit.
    The partial count is a lower bound on K, never an estimate.
    """

    exception_cls: ClassVar[type[Exception]] = RuntimeError
    description: ClassVar[str | None] = (
        "Trial {trial} reached the sample cap after {samples} samples without a hit"
    )
    trial: int
    samples: int


@dataclass
class BudgetInfeasible(Error):
    """
    The expected sample budget cannot cover one repeat per trial.
    """

    exception_cls: ClassVar[type[Exception]] = ValueError
    description: ClassVar[str | None] = (
        "Budget {budget:.6g} is below the minimum allocation cost {minimum:.6g}"
    )
    budget: float
    minimum: float


@dataclass
class NoExactLikelihood(Error):
    """
    The model can only be simulated from.
    """

    exception_cls: ClassVar[type[Exception]] = NotImplementedError
    description: ClassVar[str | None] = "Model {model} has no exact likelihood"
    model: str


@dataclass
class ConfigError(Error):
    """
    An experiment configuration is invalid.
    """

    exception_cls: ClassVar[type[Exception]] = ValueError
    description: ClassVar[str | None] = "Invalid config value for '{key}': {reason}"
    key: str
    reason: str


@dataclass
class DataError(Error):
    """
    A dataset or report file could not be read.
    """

    exception_cls: ClassVar[type[Exception]] = OSError
    description: ClassVar[str | None] = "Cannot read {path}: {reason}"
    path: str
    reason: str


def check_probability(
    p: float, name: str = "p", allow_zero: bool = False
) -> Result[float, DomainError]:
    """
    Returns Ok(p) if p lies in (0, 1] (or [0, 1] with `allow_zero`).
    """
    low_ok = p >= 0.0 if allow_zero else p > 0.0
    if math.isnan(p) or not low_ok or p > 1.0:
        return Err(DomainError(name, p))
    return Ok(float(p))


def check_sample_count(k: int, operation: str) -> Result[int, ContractViolation]:
    """
    Returns Ok(k) for a valid IBS sample count (K >= 1).
    """
    if k < 1:
        return Err(ContractViolation(operation, f"K must be >= 1, got {k}"))
    return Ok(int(k))


def check_hits(m: int, big_m: int, operation: str) -> Result[int, ContractViolation]:
    """
    Returns Ok(m) when 0 <= m <= M and M >= 1.
    """
    if big_m < 1:
        return Err(ContractViolation(operation, f"M must be >= 1, got {big_m}"))
    if not 0 <= m <= big_m:
        return Err(ContractViolation(operation, f"hits {m} outside [0, {big_m}]"))
    return Ok(int(m))
