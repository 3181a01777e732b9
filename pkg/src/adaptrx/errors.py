"""Error taxonomy shared across the package.

Configuration problems are caught at object construction time, argument
problems at call time.  Numeric faults carry the name of the layer that
produced the first non-finite value.
"""


class ConfigurationError(ValueError):
    """A config object or parameter structure is invalid or inconsistent."""


class InvalidArgument(ValueError):
    """A function argument violates its documented precondition."""


class NumericFault(ArithmeticError):
    """A computation produced a non-finite value."""


class InvalidStateError(RuntimeError):
    """An operation was called against stale or mismatched mutable state."""


class EstimationError(RuntimeError):
    """A channel estimate could not be formed from the available pilots."""
