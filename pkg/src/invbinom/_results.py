"""
Result objects returned by the estimation routines.
Annotations read as Result[Ok_Type, Error_Type], the error being a subclass
of `invbinom.Error`.

Typical use, on the IBS trial estimator:

>>> match ibs_trial(oracle, max_samples=1000):
>>>     case Ok(estimate):
>>>         total += estimate.loglik
>>>     case Err(SampleCapReached(trial, samples)):
>>>         logger.warning("gave up after %d samples", samples)

A function that can fail for several reasons annotates its error as a
union, e.g. Result[EstimateReport, SampleCapReached | NoExactLikelihood].
@date: 18.10.2026
"""

from __future__ import annotations

from enum import Enum, auto
from typing import (
    Callable,
    Final,
    Generic,
    Literal,
    NoReturn,
    Optional,
    TypeVar,
    Union,
    overload,
)

from ._errors import AnonymousError, Error

# -- Type Variables --- #
R = TypeVar("R")
T = TypeVar("T")
MaybeE = TypeVar("MaybeE", bound=Union[Error, None], covariant=True)
E = TypeVar("E", bound=Error, covariant=True)


class Sentinel(Enum):
    """
    Marks a result whose value was never set. None cannot be used,
    as it is a valid value.
    """

    NOTSET = auto()


NotsetT = Literal[Sentinel.NOTSET]

_NOTSET: Final = Sentinel.NOTSET


class AbstractResult(Generic[R, MaybeE]):
    """
    Base class for `Ok` and `Err`, used for isinstance() checks.
    Annotate with `Result` rather than this class.
    """

    __match_args__ = ("value", "error")

    def __init__(
        self,
        value: R | NotsetT = _NOTSET,
        error: Optional[MaybeE] = None,
    ) -> None:
        self.value = value
        self.error = error

    def __bool__(self) -> bool:
        return self.error is None

    def unwrap(self) -> R:
        """
        Returns the wrapped value, or throws the wrapped error.
        """
        error = self.error
        if error is not None:
            error.throw()
        value = self.value
        if value is _NOTSET:
            raise RuntimeError("This result object is empty and has never been set.")
        return value


class Ok(AbstractResult[R, None], Generic[R]):
    """
    A successful result.
    """

    __match_args__ = ("value",)
    error: None
    value: R

    @overload
    def __init__(self: Ok[None]) -> None: ...

    @overload
    def __init__(self: Ok[R], value: R) -> None: ...

    def __init__(self, value: R | None = None) -> None:
        super().__init__(value, None)  # type: ignore[arg-type]

    def __bool__(self) -> Literal[True]:
        return True

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AbstractResult):
            return NotImplemented
        return other.error is None and self.value == other.value

    def unwrap(self) -> R:
        return self.value

    def unwrap_or(self, default: object) -> R:
        return self.value

    def map(self, func: Callable[[R], T]) -> Ok[T]:
        """
        Applies `func` to the wrapped value.
        """
        return Ok(func(self.value))

    def __str__(self) -> str:
        return f"Ok({self.value})"

    def __repr__(self) -> str:
        return f"Result[Ok({self.value!r})]"

    @property
    def inner(self) -> R:
        """
        The wrapped value; shared with `Err.inner`.
        """
        return self.value


class Err(AbstractResult[NotsetT, E], Generic[E]):
    """
    An error result.
    """

    __match_args__ = ("error",)
    error: E

    def __init__(self, error: E | type[E] | object = None) -> None:
        if error is None:
            error = Error()
        elif isinstance(error, type) and issubclass(error, Error):
            error = error()
        elif not isinstance(error, Error):
            error = AnonymousError(error)
        super().__init__(_NOTSET, error)  # type: ignore[arg-type]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AbstractResult):
            return NotImplemented
        return other.error is not None and self.error == other.error

    def __bool__(self) -> Literal[False]:
        return False

    def unwrap(self) -> NoReturn:
        self.error.throw()

    def unwrap_or(self, default: T) -> T:
        return default

    def map(self, func: Callable[[object], object]) -> Err[E]:
        """
        Errors pass through `map` untouched.
        """
        return self

    def __str__(self) -> str:
        return f"Err({self.error})"

    def __repr__(self) -> str:
        return f"Result[Err({self.error!r})]"

    @property
    def inner(self) -> E:
        """
        The wrapped error; shared with `Ok.inner`.
        """
        return self.error


# --- Result type hints --- #
Result = Union[Ok[R], Err[E]]
