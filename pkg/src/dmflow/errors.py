"""Shared exception types."""


class DmflowError(Exception):
    """Base class for errors raised by this package."""


class DomainError(DmflowError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class UnsupportedRegimeError(DmflowError):
    """The requested analysis is undefined in the network's capacity regime."""


class ConfigurationError(DmflowError):
    """A scenario or simulation setup is invalid (schema, CFL, topology)."""
