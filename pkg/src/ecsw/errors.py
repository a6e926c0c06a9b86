"""Shared exception types."""


class ConfigError(Exception):
    """Invalid configuration or construction data (CLI exit code 2)."""


class NumericalAbort(RuntimeError):
    """A computation produced non-finite values (CLI exit code 3)."""
