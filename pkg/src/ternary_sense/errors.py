"""Exception hierarchy shared by every module."""


class TernarySenseError(Exception):
    """Base class for all library errors."""


class DomainError(TernarySenseError, ValueError):
    """An argument lies outside the mathematical domain of a function."""


class BracketError(DomainError):
    """The root bracket does not straddle a sign change."""


class InvalidParameterError(TernarySenseError, ValueError):
    """A scene or experiment parameter violates its invariants."""


class InfeasibleError(TernarySenseError):
    """The requested constraints cannot be met."""


class OverlapError(TernarySenseError):
    """The detection and recognition regions overlap where a no-overlap result was required."""


class DegenerateError(TernarySenseError):
    """The detection threshold sits at or above N * sigma1^2, so the overlap geometry breaks down."""


class SizeLimitError(TernarySenseError):
    """The problem is too large for an exact search."""
