"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class InvalidSeedError(ValueError):
    """A seed vector has the wrong length or entries outside (0, 1)."""


class EntropyFailureError(RuntimeError):
    """An entropy source could not supply usable values."""


class ResampleLimitError(RuntimeError):
    """An orbit was restarted more times than the configured cap."""


class DegenerateSampleError(ValueError):
    """A statistic is undefined for this sample (e.g. zero variance)."""


class BufferSizeError(ValueError):
    """A byte buffer does not hold a whole number of output words."""


class QualityWarning(UserWarning):
    """Configuration is legal but known to degrade output quality."""


class TimerResolutionWarning(UserWarning):
    """A benchmark pass was too short for the timer to resolve reliably."""
