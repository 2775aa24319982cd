"""Exception classes for scalecheck operations."""

from typing import Any, Optional


class ScaleCheckError(Exception):
    """Base exception for scalecheck errors."""
    pass


class ScaleCheckInputError(ScaleCheckError):
    """Raised when user-supplied input cannot be used."""
    pass


class ModelSpecError(ScaleCheckInputError):
    """Raised when a model or constraint description is invalid."""

    def __init__(self, message: str, line_number: Optional[int] = None, path: Optional[str] = None):
        self.message = message
        self.line_number = line_number
        self.path = path
        if line_number is not None:
            message = f"line {line_number}: {message}"
        if path is not None:
            message = f"{path}: {message}"
        super().__init__(message)


class ConstraintError(ScaleCheckInputError):
    """Raised when constraints reference unknown parameters or are malformed."""
    pass


class InconsistentConstraintError(ConstraintError):
    """Raised when a constraint system has no solution."""
    pass


class IdentificationError(ScaleCheckInputError):
    """Raised when a model has more free parameters than sample moments."""
    pass


class CovarianceInputError(ScaleCheckInputError):
    """Raised when a covariance matrix file is unreadable or unusable."""

    def __init__(self, message: str, path: Optional[str] = None):
        self.message = message
        self.path = path
        if path is not None:
            message = f"{path}: {message}"
        super().__init__(message)


class NotPositiveDefiniteError(ScaleCheckError):
    """Raised when a covariance matrix is not positive definite."""
    pass


class EstimationError(ScaleCheckError):
    """Raised when maximum likelihood estimation fails."""
    pass


class ConvergenceError(EstimationError):
    """Raised when the optimizer stops before reaching the tolerance."""

    def __init__(self, message: str, estimate: Any = None):
        self.estimate = estimate
        super().__init__(message)


class NestingViolationError(ScaleCheckError):
    """Raised when a restricted model fits better than its unrestricted parent."""
    pass


class AuditError(ScaleCheckError):
    """Raised when a fit inside an audit fails."""

    def __init__(self, message: str, scaling_label: str):
        self.scaling_label = scaling_label
        super().__init__(f"{scaling_label}: {message}")
