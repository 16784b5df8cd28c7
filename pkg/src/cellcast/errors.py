"""Exception types raised by the cellcast pipeline.

Everything derives from CellcastError so callers can catch the whole
family; validation-style errors additionally derive from ValueError.
"""


class CellcastError(Exception):
    pass


class ValidationError(CellcastError, ValueError):
    """Bad inputs detected before any work is done."""


# --- ingest ---------------------------------------------------------------

class MalformedLine(ValidationError):
    """A CDR line is missing mandatory columns or has non-numeric fields."""


class NegativeActivity(ValidationError):
    """The internet-activity field parsed below zero."""


class UnalignedSpan(ValidationError):
    """Span boundaries are not whole multiples of the bin width."""


# --- clustering -----------------------------------------------------------

class EmptySeries(ValidationError):
    pass


class TooFewPoints(ValidationError):
    """Fewer distinct profiles than requested clusters."""


class InvalidK(ValidationError):
    pass


class CurveTooShort(ValidationError):
    """Knee detection needs at least three curve points."""


class MissingSeries(ValidationError):
    """A cell in the cluster assignment has no binned series."""


class SpanMismatch(ValidationError):
    """Series being combined do not share span and bin width."""


# --- series prep ----------------------------------------------------------

class SeriesTooShort(ValidationError):
    pass


class ConstantSeries(ValidationError):
    """Min-max scaling is undefined on a constant series."""


# --- recurrent core -------------------------------------------------------

class ShapeMismatch(ValidationError):
    pass


class LengthMismatch(ValidationError):
    pass


class Empty(ValidationError):
    pass


class TapeMismatch(ValidationError):
    """Backward pass called with a tape from a different batch."""


# --- statistics -----------------------------------------------------------

class TooFewGroups(ValidationError):
    pass


class EmptyGroup(ValidationError):
    pass


class DomainError(ValidationError):
    pass


# --- synthesis / config ---------------------------------------------------

class InvalidSpec(ValidationError):
    pass


class UnknownCluster(ValidationError):
    pass


class ConfigError(ValidationError):
    """Pipeline configuration failed validation."""
