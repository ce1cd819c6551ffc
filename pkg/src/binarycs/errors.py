"""Exception types shared across the package.

ValidationError and its subclasses signal bad arguments or malformed input
documents; SizeError and friends signal problems that are structurally fine
but too large for an enumeration-based operation.  The CLI maps the former
to exit code 2 and the latter to exit code 3.
"""


class BinaryCSError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(BinaryCSError):
    """Invalid argument, violated invariant, or malformed input."""


class DimensionError(ValidationError):
    """Shapes or lengths do not line up."""


class SparsityError(ValidationError):
    """Requested sparsity level exceeds the signal length."""


class ParseError(ValidationError):
    """A document could not be parsed; the message names the offending field."""


class ScheduleError(ValidationError):
    """Annealing schedule parameters are out of range."""


class DomainError(ValidationError):
    """A state vector contains values outside its domain ({0,1} or {-1,+1})."""


class RangeError(ValidationError):
    """Coefficients lie outside the range the operation requires."""


class DegenerateColumnError(ValidationError):
    """A matrix column is identically zero where a nonzero column is required."""


class EmbeddingError(ValidationError):
    """An embedding map violates one of its invariants."""


class SizeError(BinaryCSError):
    """Problem too large for an enumeration-based operation."""


class CapacityError(SizeError):
    """Requested logical size exceeds what the hardware cell can host."""


class NumericError(BinaryCSError):
    """Non-finite values appeared where finite numbers are required."""
