"""Exceptions raised by `labeldp`.

Every error is a `LabelDPError`. The intermediate classes group errors by the
exit status the command line maps them to.
"""
from __future__ import annotations


class LabelDPError(Exception):
    """Base class of every error raised by the library."""


class InvalidParameter(LabelDPError, ValueError):
    """A scalar parameter is outside its admissible range."""


class NonPositiveZeta(InvalidParameter):
    pass


class NegativeEpsilon(InvalidParameter):
    pass


class ReversedBounds(InvalidParameter):
    pass


class InvalidDelta(InvalidParameter):
    pass


class WrongKind(InvalidParameter):
    """A noise spec of one kind was handed to the other kind's randomizer."""


class MissingSensitivity(InvalidParameter):
    """Neither a sensitivity nor clip bounds were given to an additive mechanism."""


class InvalidBudgetSplit(InvalidParameter):
    pass


class InvalidDensity(LabelDPError, ValueError):
    """Nodes and values do not describe a step density."""


class NonMonotoneNodes(InvalidDensity):
    pass


class NegativeMass(InvalidDensity):
    pass


class ZeroTotalMass(InvalidDensity):
    pass


class ShapeMismatch(InvalidDensity):
    pass


class OutOfInterval(LabelDPError, ValueError):
    """A label outside the randomization interval where only interior labels are meaningful."""


class EqualHeights(LabelDPError, ArithmeticError):
    """Critical points are undefined because both bins have the same height."""


class InsufficientSamples(LabelDPError, ValueError):
    pass


class DataError(LabelDPError):
    """The dataset cannot be processed."""


class EmptyDataset(DataError):
    pass


class DegenerateSpread(DataError):
    """All randomized labels are equal, histogram bins cannot be formed."""


class LengthMismatch(DataError):
    pass


class LabelColumnNotFound(DataError):
    pass


class NonFiniteLabel(DataError):
    pass


class ConfigError(LabelDPError):
    """Invalid command line configuration."""
