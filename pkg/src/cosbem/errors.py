"""Exception hierarchy shared by the pricing modules."""

from __future__ import annotations


class CosBemError(Exception):
    """Base class for all package errors."""


class ArgumentError(CosBemError, ValueError):
    """An argument violates an operation precondition."""


class DomainError(CosBemError, ValueError):
    """Argument lies outside the supported numerical range."""


class NumericalInstabilityError(CosBemError, ArithmeticError):
    """A computation produced non-finite intermediates."""

    def __init__(self, message: str, **context):
        self.context = context
        if context:
            details = ", ".join(f"{k}={v!r}" for k, v in context.items())
            message = f"{message} ({details})"
        super().__init__(message)


class DegenerateCumulantError(CosBemError, ArithmeticError):
    """Second cumulant is non-positive, so no truncation interval exists."""


class QuadratureError(CosBemError, ArithmeticError):
    """Adaptive quadrature failed to reach its tolerance."""

    def __init__(self, message: str, error_estimate: float = float("nan"), **context):
        self.error_estimate = error_estimate
        self.context = context
        details = [f"error estimate {error_estimate:.3e}"]
        details += [f"{k}={v!r}" for k, v in context.items()]
        super().__init__(f"{message} ({', '.join(details)})")


class SingularSystemError(CosBemError, ArithmeticError):
    """A collocation system has a zero pivot."""


class IllConditionedError(CosBemError, ArithmeticError):
    """A diagonal block is too ill-conditioned to invert reliably."""


class ConfigError(CosBemError, ValueError):
    """Experiment configuration is invalid.

    ``line`` is the 1-based line number in the config file, when known.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        self.reason = message
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
