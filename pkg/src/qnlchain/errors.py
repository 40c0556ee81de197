"""Exception types shared across the package."""


class QnlChainError(Exception):
    """Base class for all package errors."""


class DomainError(QnlChainError):
    """An argument lies outside the mathematical domain of an operation."""


class ArgumentError(QnlChainError):
    """An argument is structurally invalid (wrong range, size mismatch, ...)."""


class GeometryError(QnlChainError):
    """A configuration is degenerate (coincident neighbors, zero bond, ...)."""


class NotPositiveDefiniteError(QnlChainError):
    """A matrix required to be positive definite failed its Cholesky factorization."""


class BracketError(QnlChainError):
    """A root bracket does not contain a sign change."""


class StabilityError(QnlChainError):
    """A linearized solve was requested at an unstable configuration."""

    def __init__(self, message, numeric_inf=None):
        super().__init__(message)
        self.numeric_inf = numeric_inf
