"""Result and option values returned by the library where a caller is expected to branch.

`Result[T, E]` is either `Ok[T]` or `Err[E]`, `Option[T]` is either `Some[T]` or `NOTHING`.
Only the methods the package actually needs are provided.
"""
from __future__ import annotations

import abc
import typing as t

from typing_extensions import Final, TypeAlias

T = t.TypeVar("T")  # Success type
U = t.TypeVar("U")
E = t.TypeVar("E", covariant=True)
F = t.TypeVar("F")


class OptionABC(t.Generic[T], metaclass=abc.ABCMeta):
    __slots__ = ()

    @abc.abstractmethod
    def __bool__(self) -> bool:
        """`True` for `Some`, `False` for `Nothing`."""

    @abc.abstractmethod
    def __iter__(self) -> t.Iterator[T]:
        """Yield the contained value once (if Some)."""

    @abc.abstractmethod
    def is_some(self) -> bool:
        """A value is held."""

    @abc.abstractmethod
    def is_empty(self) -> bool:
        """No value held."""

    @abc.abstractmethod
    def expect(self, msg: str) -> T:
        """The value, else raise `IsNothingError` with message `msg`."""

    @abc.abstractmethod
    def unwrap(self) -> T:
        """The value, else raise `IsNothingError`."""

    @abc.abstractmethod
    def unwrap_or(self, default: T) -> T:
        """The value, else `default`."""

    @abc.abstractmethod
    def map(self, func: t.Callable[[T], U]) -> Option[U]:
        """Apply `func` to the value, if any."""

    @abc.abstractmethod
    def filter(self, predicate: t.Callable[[T], bool]) -> Option[T]:
        """Keep the value only if `predicate` holds."""

    @abc.abstractmethod
    def or_option(self, other: Option[T]) -> Option[T]:
        """This option when it holds a value, else `other`."""


class ResultABC(t.Generic[T, E], metaclass=abc.ABCMeta):
    """Outcome of a computation: `Ok[T]` on success, `Err[E]` on failure."""

    __slots__ = ()

    @abc.abstractmethod
    def __bool__(self) -> bool:
        """`True` for `Ok`, `False` for `Err`."""

    @abc.abstractmethod
    def is_ok(self) -> bool:
        """The computation succeeded."""

    @abc.abstractmethod
    def is_err(self) -> bool:
        """The computation failed."""

    @abc.abstractmethod
    def ok(self) -> Option[T]:
        """Converts from `Result[T, E]` to `Option[T]`."""

    @abc.abstractmethod
    def err(self) -> Option[E]:
        """Converts from `Result[T, E]` to `Option[E]`."""

    @abc.abstractmethod
    def map(self, func: t.Callable[[T], U]) -> Result[U, E]:
        """Apply `func` to the contained Ok value, leaving an Err untouched."""

    @abc.abstractmethod
    def map_err(self, func: t.Callable[[E], F]) -> Result[T, F]:
        """Apply `func` to the contained Err value, leaving an Ok untouched."""

    @abc.abstractmethod
    def and_then(self, func: t.Callable[[T], Result[U, E]]) -> Result[U, E]:
        """Call `func` with the Ok value, or return the Err unchanged."""

    @abc.abstractmethod
    def expect(self, msg: str) -> T:
        """Return the Ok value or raise `IsNotOkError` with `msg`."""

    @abc.abstractmethod
    def unwrap(self) -> T:
        """Return the Ok value or raise."""

    @abc.abstractmethod
    def unwrap_err(self) -> E:
        """Return the Err value or raise."""

    @abc.abstractmethod
    def unwrap_or(self, default: T) -> T:
        """Return the Ok value or `default`."""


class Some(OptionABC[T]):
    """An option holding a value."""

    __slots__ = ("_value",)
    __match_args__ = ("value",)

    def __init__(self, value: T) -> None:
        self._value = value

    @property
    def value(self) -> T:
        return self._value

    def __repr__(self) -> str:
        return f"Some({self._value!r})"

    def __eq__(self, other: t.Any) -> bool:
        return isinstance(other, Some) and self._value == other._value

    def __ne__(self, other: t.Any) -> bool:
        return not self == other

    def __hash__(self) -> int:
        return hash((True, self._value))

    def __bool__(self) -> t.Literal[True]:
        return True

    def __iter__(self) -> t.Iterator[T]:
        yield self._value

    def is_some(self) -> t.Literal[True]:
        return True

    def is_empty(self) -> t.Literal[False]:
        return False

    def expect(self, msg: str) -> T:
        return self._value

    def unwrap(self) -> T:
        return self._value

    def unwrap_or(self, default: object) -> T:
        return self._value

    def map(self, func: t.Callable[[T], U]) -> Some[U]:
        return Some(func(self._value))

    def filter(self, predicate: t.Callable[[T], bool]) -> Option[T]:
        return self if predicate(self._value) else NOTHING

    def or_option(self, other: object) -> Some[T]:
        return self


class Nothing(OptionABC[t.NoReturn]):
    """The empty option. Use the `NOTHING` singleton."""

    __slots__ = ()
    _instance: t.ClassVar[Nothing | None] = None

    def __new__(cls) -> Nothing:
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    @property
    def value(self) -> t.NoReturn:
        raise IsNothingError("option holds no value")

    def __repr__(self) -> str:
        return "Nothing()"

    def __eq__(self, other: t.Any) -> bool:
        return self is other

    def __ne__(self, other: t.Any) -> bool:
        return self is not other

    def __hash__(self) -> int:
        return hash((False, "Nothing"))

    def __bool__(self) -> t.Literal[False]:
        return False

    def __iter__(self) -> t.Iterator[t.NoReturn]:
        return iter(())

    def is_some(self) -> t.Literal[False]:
        return False

    def is_empty(self) -> t.Literal[True]:
        return True

    def expect(self, msg: str) -> t.NoReturn:
        raise IsNothingError(msg)

    def unwrap(self) -> t.NoReturn:
        raise IsNothingError("Called `unwrap()` on a `Nothing` value")

    def unwrap_or(self, default: U) -> U:
        return default

    def map(self, func: object) -> Nothing:
        return self

    def filter(self, predicate: object) -> Nothing:
        return self

    def or_option(self, other: Option[U]) -> Option[U]:
        return other


class Ok(ResultABC[T, t.NoReturn]):
    """A successful outcome."""

    __slots__ = ("_value",)
    __match_args__ = ("value",)

    def __init__(self, value: T) -> None:
        self._value = value

    @property
    def value(self) -> T:
        return self._value

    def __repr__(self) -> str:
        return f"Ok({self._value!r})"

    def __eq__(self, other: t.Any) -> bool:
        return isinstance(other, Ok) and self._value == other._value

    def __ne__(self, other: t.Any) -> bool:
        return not self == other

    def __hash__(self) -> int:
        return hash((True, self._value))

    def __bool__(self) -> t.Literal[True]:
        return True

    def is_ok(self) -> t.Literal[True]:
        return True

    def is_err(self) -> t.Literal[False]:
        return False

    def ok(self) -> Some[T]:
        return Some(self._value)

    def err(self) -> Nothing:
        return NOTHING

    def map(self, func: t.Callable[[T], U]) -> Ok[U]:
        return Ok(func(self._value))

    def map_err(self, func: object) -> Ok[T]:
        return self

    def and_then(self, func: t.Callable[[T], Result[U, E]]) -> Result[U, E]:
        return func(self._value)

    def expect(self, msg: str) -> T:
        return self._value

    def unwrap(self) -> T:
        return self._value

    def unwrap_err(self) -> t.NoReturn:
        raise IsOkError(self, "Called `unwrap_err()` on an `Ok` value")

    def unwrap_or(self, default: object) -> T:
        return self._value


class Err(ResultABC[t.NoReturn, E]):
    """A failed outcome carrying an error value (usually a `LabelDPError`)."""

    __slots__ = ("_value",)
    __match_args__ = ("value",)

    def __init__(self, value: E) -> None:
        self._value = value

    @property
    def value(self) -> E:
        return self._value

    def __repr__(self) -> str:
        return f"Err({self._value!r})"

    def __eq__(self, other: t.Any) -> bool:
        return isinstance(other, Err) and self._value == other._value

    def __ne__(self, other: t.Any) -> bool:
        return not self == other

    def __hash__(self) -> int:
        return hash((False, self._value))

    def __bool__(self) -> t.Literal[False]:
        return False

    def is_ok(self) -> t.Literal[False]:
        return False

    def is_err(self) -> t.Literal[True]:
        return True

    def ok(self) -> Nothing:
        return NOTHING

    def err(self) -> Some[E]:
        return Some(self._value)

    def map(self, func: object) -> Err[E]:
        return self

    def map_err(self, func: t.Callable[[E], F]) -> Err[F]:
        return Err(func(self._value))

    def and_then(self, func: object) -> Err[E]:
        return self

    def expect(self, msg: str) -> t.NoReturn:
        raise IsNotOkError(self, msg)

    def unwrap(self) -> t.NoReturn:
        # Re-raise the original exception when the error value is one
        if isinstance(self._value, BaseException):
            raise self._value
        raise IsNotOkError(self, f"Called `unwrap()` on an `Err` value: {self._value!r}")

    def unwrap_err(self) -> E:
        return self._value

    def unwrap_or(self, default: U) -> U:
        return default


Result: TypeAlias = t.Union[Ok[T], Err[E]]
"""Either `Ok[T]` or `Err[E]`."""

Option: TypeAlias = t.Union[Some[T], Nothing]
"""Either `Some[T]` or `Nothing`."""

ResultType: Final = (Ok, Err)
OptionType: Final = (Some, Nothing)

NOTHING = Nothing()


def option(value: T | None) -> Option[T]:
    """Lift an optional python value into an `Option`."""
    return NOTHING if value is None else Some(value)


class UnwrapError(Exception):
    def __init__(self, msg: str) -> None:
        super().__init__(msg)


class IsNothingError(UnwrapError):
    pass


class IsOkError(UnwrapError):
    def __init__(self, result: Ok[t.Any], message: str) -> None:
        self.result = result
        super().__init__(message)


class IsNotOkError(UnwrapError):
    def __init__(self, result: Err[t.Any], message: str) -> None:
        self.result = result
        super().__init__(message)
