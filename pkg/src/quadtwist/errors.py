"""Exception types shared across the package."""


class QuadTwistError(Exception):
    """Base class for all package errors."""


class DomainError(QuadTwistError, ValueError):
    """An argument violates a documented precondition."""


class ResourceLimitError(QuadTwistError):
    """A computation would exceed a configured memory/size budget.

    Carries ``required`` when the caller can retry with a bigger table.
    """

    def __init__(self, message, required=None):
        super().__init__(message)
        self.required = required


class NumericalError(QuadTwistError):
    """Quadrature or iteration failed to reach the requested tolerance."""


class IncompleteFactorizationError(QuadTwistError):
    """Trial division left a composite cofactor beyond the prime table."""

    def __init__(self, message, cofactor=None):
        super().__init__(message)
        self.cofactor = cofactor


class ConfigError(QuadTwistError):
    """A curve/run configuration is missing or inconsistent."""
