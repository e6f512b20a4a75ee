from typing import Optional, Dict, Any


EXIT_DOMAIN = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3


class BaseAppException(Exception):
    """Base exception class for the application."""

    def __init__(self, message: str, status_code: int = 500, exit_code: int = EXIT_DOMAIN,
                 details: Optional[Dict[str, Any]] = None):
        self.message = message
        self.status_code = status_code
        self.exit_code = exit_code
        self.details = details or {}
        super().__init__(self.message)


# Usage errors: the input is malformed.

class ValidationError(BaseAppException):
    """Exception for validation errors."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message, status_code=400, exit_code=EXIT_USAGE, details=details)


class DimensionError(ValidationError):
    """A legal permutation was applied to a tuple of another length."""


class GermParseError(ValidationError):
    """Exception for polynomial syntax errors."""

    def __init__(self, message: str, position: Optional[int] = None, details: Optional[Dict[str, Any]] = None):
        self.position = position
        details = dict(details or {})
        if position is not None:
            details["position"] = position
            message = f"{message} (at position {position})"
        super().__init__(message, details=details)


class NotAGermError(ValidationError):
    """A component has a nonzero constant term."""

    def __init__(self, message: str = "not a germ at 0", details: Optional[Dict[str, Any]] = None):
        super().__init__(message, details=details)


# Domain errors: well formed, but outside the mathematics.

class DomainError(BaseAppException):
    """Base class for well-formed inputs the theory rejects."""

    def __init__(self, message: str, status_code: int = 422, details: Optional[Dict[str, Any]] = None):
        super().__init__(message, status_code=status_code, exit_code=EXIT_DOMAIN, details=details)


class RegularTypeError(DomainError):
    """Exception for operations that need at least one singular point."""

    def __init__(self, message: str = "tuple has no singular points (regular type)",
                 details: Optional[Dict[str, Any]] = None):
        super().__init__(message, details=details)


class InfeasibleTupleError(DomainError):
    """Exception for tuples that violate the feasibility conditions."""


class CapacityError(DomainError):
    """Exception for requests beyond the configured resource bounds."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message, status_code=413, details=details)


class ConstructionVerificationError(DomainError):
    """The realized circle map did not reproduce the requested class."""


class RateLimitError(BaseAppException):
    """Exception for clients exceeding the heavy-endpoint rate limit."""

    def __init__(self, message: str = "Rate limit exceeded", details: Optional[Dict[str, Any]] = None):
        super().__init__(message, status_code=429, exit_code=EXIT_DOMAIN, details=details)


# Numerical errors: the computation could not certify its answer.

class NumericalError(BaseAppException):
    """Base class for numerical failures."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message, status_code=500, exit_code=EXIT_NUMERICAL, details=details)


class LevelCurveError(NumericalError):
    """Exception for level curves that could not be traced as one closed loop."""


class DoublePointError(NumericalError):
    """Two singular values coincide within tolerance."""

    def __init__(self, message: str = "double point at this epsilon - refine epsilon",
                 details: Optional[Dict[str, Any]] = None):
        super().__init__(message, details=details)


class NonMorseError(NumericalError):
    """An extremum of the angle profile is too flat to be Morse."""

    def __init__(self, message: str = "non-Morse at this epsilon", details: Optional[Dict[str, Any]] = None):
        super().__init__(message, details=details)


class NonFoldError(NumericalError):
    """A singular point of the germ near the level curve is not a fold."""

    def __init__(self, message: str = "non-fold singularity detected", details: Optional[Dict[str, Any]] = None):
        super().__init__(message, details=details)


class ExtractionError(NumericalError):
    """The extracted marks are inconsistent (odd count, infeasible tuple, winding mismatch)."""


class DidNotStabilizeError(NumericalError):
    """Exception for when the epsilon schedule is exhausted."""

    def __init__(self, message: str = "did not stabilize - germ may not be finitely determined",
                 details: Optional[Dict[str, Any]] = None):
        super().__init__(message, details=details)
