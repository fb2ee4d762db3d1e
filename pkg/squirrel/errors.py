"""
Exception hierarchy shared across the package.
"""


class SquirrelError(Exception):
    """Base class for all errors raised by squirrel."""


class ConfigError(SquirrelError, ValueError):
    """Invalid space, registry, portfolio, settings or CLI input."""


class ProtocolError(SquirrelError, RuntimeError):
    """Ask/tell misuse: double suggest, observe without suggest, mismatched batch."""


class FitError(SquirrelError):
    """A surrogate could not be fitted (e.g. kernel matrix not positive definite)."""
