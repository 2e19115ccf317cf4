"""
Base layer for error types.

Estimation can fail in ways that are part of normal operation (a trial
hitting its sample cap, an infeasible repeat budget, a malformed config),
those are returned as values. Errors that are genuine contract violations
are thrown through `Error.throw()`.

@date: 18.10.2026
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Any, ClassVar, NoReturn


@dataclass
class Error:
    """
    Base representation for an error.

    Errors carrying arguments should be decorated with @dataclass and
    declare them as fields. Private fields (starting with '_') are excluded
    from `args`.

    Class parameters
    ----------------
    description: str
        Description of the error, formatted with the error arguments.

    exception_cls: type[Exception]
        Exception class used when throwing this error.
    """

    description: ClassVar[str | None] = None
    exception_cls: ClassVar[type[Exception]] = Exception
    _notes: list[str] = field(
        init=False, compare=False, hash=False, repr=False, default_factory=list
    )

    @property
    def args(self) -> dict[str, Any]:
        """
        Returns
        -------
        dict[str, Any]
            The error arguments and their current values
        """
        return {name: value for name, value in asdict(self).items() if name[0] != "_"}

    @property
    def notes(self) -> tuple[str, ...]:
        return tuple(self._notes)

    def add_notes(self, *notes: str) -> None:
        """
        Adds context to this error, carried over to the exception on `throw()`.
        """
        self._notes.extend(notes)

    def __str__(self) -> str:
        if self.description is None:
            return ""
        return self.description.format(**self.args)

    def throw(self) -> NoReturn:
        """
        Raises this error as an exception of class `exception_cls`.
        """
        exc = self.exception_cls(str(self))
        for note in self._notes:
            exc.add_note(note)
        raise exc


@dataclass
class AnonymousError(Error):
    """
    Wraps a value that is not an `Error` so it can travel inside `Err`.
    """

    description: ClassVar[str | None] = "{value}"
    value: object
