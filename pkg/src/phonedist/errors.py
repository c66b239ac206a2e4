"""Exception types raised across the toolkit.

Every error the library raises deliberately derives from PhonedistError so
callers (and the CLI) can catch one base class. Most also derive from
ValueError since they signal bad input values.
"""


class PhonedistError(Exception):
    """Base class for all toolkit errors."""

    # KeyError-derived subclasses would otherwise repr() their message
    def __str__(self) -> str:
        return Exception.__str__(self)


class MalformedLine(PhonedistError, ValueError):
    """An alignment line does not have the 'begin end label' shape."""


class MalformedRecord(PhonedistError, ValueError):
    """A structured-text record (interchange/export) is invalid."""


class NonMonotonic(PhonedistError, ValueError):
    """Segment bounds are inverted or segments overlap."""


class UnknownLabel(PhonedistError, KeyError):
    """A phone label has no rule in the mapping table."""


class UtteranceMismatch(PhonedistError, ValueError):
    """Alignment and unit sequence belong to different utterances."""


class EmptyCategory(PhonedistError, ValueError):
    """A category has zero observations, so no distribution exists."""


class InconsistentInventory(PhonedistError, ValueError):
    """Distributions do not share the same unit inventory size."""


class UnitOutOfRange(PhonedistError, IndexError):
    """A unit id lies outside [0, omega_size)."""


class DegenerateInventory(PhonedistError, ValueError):
    """Inventory too small for normalized entropy (needs at least 2 units)."""


class UnknownCategory(PhonedistError, KeyError):
    """A category is missing from a feature/class table or matrix."""


class AsymmetricMatrix(PhonedistError, ValueError):
    """A distance matrix is not symmetric within tolerance."""


class NonzeroDiagonal(PhonedistError, ValueError):
    """A distance matrix has nonzero self-distances."""


class TooFewItems(PhonedistError, ValueError):
    """Clustering needs at least two items."""


class InvalidK(PhonedistError, ValueError):
    """Requested cluster count is outside [1, n]."""


class LengthMismatch(PhonedistError, ValueError):
    """Paired vectors have different lengths."""


class ConstantInput(PhonedistError, ValueError):
    """Correlation is undefined for a constant vector."""


class TooFewPoints(PhonedistError, ValueError):
    """Correlation needs at least three paired points."""


class LabelMismatch(PhonedistError, ValueError):
    """Two matrices do not cover the same label set."""


class KTooLarge(PhonedistError, ValueError):
    """Neighbor count k is not in [1, n - 1]."""


class MissingExport(PhonedistError, FileNotFoundError):
    """An analysis command ran before any ingest export exists."""
