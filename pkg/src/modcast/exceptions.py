"""Exception hierarchy shared by every subpackage."""


class ModcastError(Exception):
    """Base class for all errors raised by modcast."""


class InvalidInputError(ModcastError, ValueError):
    """An argument violates a documented precondition."""


class InvalidConfigError(InvalidInputError):
    """A pipeline configuration failed validation."""


class InvalidCombinationError(InvalidConfigError):
    """Two module choices cannot be composed (e.g. frequency embedding with an RNN)."""


class NumericalError(ModcastError, ArithmeticError):
    """A computation produced non-finite values."""

    def __init__(self, message, stage=None):
        super().__init__(message if stage is None else f"{stage}: {message}")
        self.stage = stage


class UndefinedPropertyError(ModcastError, ValueError):
    """A data property is mathematically undefined for the given series."""


class DegenerateSeriesWarning(UserWarning):
    """Emitted when a property falls back to a conventional value on degenerate input."""
