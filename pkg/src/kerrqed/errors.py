"""Exception hierarchy shared by all modules."""


class KerrQEDError(Exception):
    """Base class for package errors."""


class InvalidInputError(KerrQEDError, ValueError):
    """Argument violates an operation precondition."""


class SingularParametersError(KerrQEDError, ValueError):
    """Parameters make a closed-form expression singular."""


class TruncationOverflowError(KerrQEDError, ValueError):
    """Populated photon numbers cannot be represented in the target truncation."""


class NumericFailureError(KerrQEDError, ArithmeticError):
    """A numerical routine failed to converge or produced non-finite output."""


class ConfigError(KerrQEDError, ValueError):
    """Scenario configuration failed validation."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class ResourceCapError(KerrQEDError, MemoryError):
    """Requested oracle run exceeds the configured memory cap."""

    def __init__(self, message, estimate_mb=None, suggested_truncation=None):
        super().__init__(message)
        self.estimate_mb = estimate_mb
        self.suggested_truncation = suggested_truncation
