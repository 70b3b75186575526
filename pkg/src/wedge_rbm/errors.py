"""Exception types shared across the toolkit."""


class WedgeRbmError(Exception):
    """Base class for all toolkit errors."""


class ConfigurationError(WedgeRbmError, ValueError):
    """A geometric or experiment configuration is invalid."""


class DomainError(WedgeRbmError, ValueError):
    """An input lies outside the domain an operation is defined on."""


class NumericalError(WedgeRbmError, RuntimeError):
    """A computation produced non-finite values. Carries the step index."""

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step


class EstimationError(WedgeRbmError, RuntimeError):
    """Not enough (or unusable) data for a statistical estimate."""


class DegenerateSampleError(EstimationError):
    """Sample has no spread; a tail index cannot be estimated."""


class DegenerateExcursionError(WedgeRbmError, RuntimeError):
    """An excursion carries zero variation; the time change is undefined on it."""


class UnsupportedExponentError(WedgeRbmError, ValueError):
    """Exact p-variation via the dynamic program requires p >= 1."""


class PartitionSizeError(WedgeRbmError, ValueError):
    """Brute-force partition enumeration is capped at 14 points."""


class PreconditionError(WedgeRbmError, ValueError):
    """A checker was called on an interval violating its preconditions."""
