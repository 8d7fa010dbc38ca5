"""Exception hierarchy shared by the library and the CLI."""


class VocdmError(Exception):
    """Base class for all library errors."""


class ShapeError(VocdmError, ValueError):
    """Operand shapes are incompatible."""


class NotHermitianError(VocdmError, ValueError):
    """A matrix expected to be Hermitian (or PSD) is not."""


class BudgetExceededError(VocdmError, RuntimeError):
    """An exhaustive enumeration would exceed its configured candidate budget."""


class ConfigError(VocdmError, ValueError):
    """Invalid experiment configuration."""
