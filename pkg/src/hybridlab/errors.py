"""Shared exception types."""


class ValidationError(ValueError):
    """A configuration or input failed a contract check."""


class NumericalError(RuntimeError):
    """A computation produced non-finite or otherwise unusable values."""
