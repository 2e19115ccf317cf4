"""
Composition tools around Results, used when running many estimation
cells where a single failed cell should either stop the run or be reported.

@date: 18.10.2026
"""

from __future__ import annotations

from typing import Iterable, TypeVar, assert_never

from ._errors import Error
from ._results import Err, Ok, Result

T = TypeVar("T")
E = TypeVar("E", bound=Error)


def collect_results(results: Iterable[Result[T, E]]) -> Result[list[T], E]:
    """
    Gathers the values of `results`, stopping on the first error.

    Examples
    --------
    >>> collect_results([Ok(1), Ok(2)])
    Result[Ok([1, 2])]

    >>> collect_results([Ok(1), Err(SampleCapReached(3, 100)), Ok(2)])
    Result[Err(SampleCapReached(trial=3, samples=100))]
    """
    values: list[T] = []
    for r in results:
        match r:
            case Ok(value):
                values.append(value)
            case Err(error):
                return Err(error)
            case _ as unreachable:
                assert_never(unreachable)
    return Ok(values)


def partition_results(
    results: Iterable[Result[T, E]],
) -> tuple[list[tuple[int, T]], list[tuple[int, E]]]:
    """
    Splits results into indexed values and indexed errors, keeping going
    past failures. Indices refer to the position in `results`.
    """
    values: list[tuple[int, T]] = []
    errors: list[tuple[int, E]] = []
    for index, r in enumerate(results):
        match r:
            case Ok(value):
                values.append((index, value))
            case Err(error):
                errors.append((index, error))
    return values, errors

