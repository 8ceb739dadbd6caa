"""Exception hierarchy shared by every module."""


class AnomalyForgeError(Exception):
    """Base class for all errors raised by the package."""


class ParameterError(AnomalyForgeError, ValueError):
    pass


class DomainError(AnomalyForgeError, ValueError):
    pass


class UnsupportedModelError(AnomalyForgeError, TypeError):
    pass


class PreconditionError(AnomalyForgeError):
    pass


class NumericError(AnomalyForgeError, ArithmeticError):
    """Numerically ill-posed evaluation, e.g. a near-singular metric."""

    def __init__(self, message: str, condition: float | None = None):
        super().__init__(message)
        self.condition = condition


class AccuracyError(AnomalyForgeError, ArithmeticError):
    """A numeric scheme did not reach its requested accuracy.

    Carries the best value obtained so callers can still inspect it.
    """

    def __init__(self, message: str, best_value: float, error_estimate: float):
        super().__init__(message)
        self.best_value = best_value
        self.error_estimate = error_estimate


class ResolutionError(AnomalyForgeError):
    """A time grid was too coarse to resolve every zero crossing."""


class SchemaError(AnomalyForgeError, ValueError):
    """Job document failed validation; ``pointer`` locates the bad field."""

    def __init__(self, message: str, pointer: str = ""):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer
