"""Exception types raised by moneyflow.

Every error derives from :class:`MoneyFlowError`, so callers can catch the whole
family at once. Each subclass also derives from the closest builtin exception,
which keeps ``except ValueError`` style handling working.
"""

from typing import Any, Optional


class MoneyFlowError(Exception):
    """Base class for all moneyflow errors."""


class DomainError(MoneyFlowError, ValueError):
    """An input lies outside the domain of the model.

    Raised for rho outside ``(0, 1)``, non-positive exchange rates, invalid
    coupling constants and similar violations.
    """


class NonFiniteError(MoneyFlowError, ArithmeticError):
    """The equations of motion produced a NaN or an infinity."""


class StepFailure(MoneyFlowError, RuntimeError):
    """The step-size controller could not meet the requested tolerance.

    Attributes:
        partial: The trajectory up to the last accepted step, or ``None`` if
            not even the first step succeeded.
    """

    def __init__(self, message: str, partial: Optional[Any] = None) -> None:
        super().__init__(message)
        self.partial = partial


class DegenerateError(MoneyFlowError, ArithmeticError):
    """The linearized system is marginal (e.g. ``alpha2 == 4``)."""


class FitError(MoneyFlowError, ValueError):
    """Not enough oscillation extrema to fit an envelope."""


class SamplingError(MoneyFlowError, ValueError):
    """A trajectory is too short for the requested sampling interval."""


class GridMismatch(MoneyFlowError, ValueError):
    """Two series that must share a time grid do not."""


class ConfigError(MoneyFlowError, ValueError):
    """Invalid scenario configuration.

    Attributes:
        field: Dotted path of the offending field (``"model.alpha2"``), or
            ``None`` when the error is not tied to one field.
    """

    def __init__(self, message: str, field: Optional[str] = None) -> None:
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field


class InvariantViolation(MoneyFlowError, AssertionError):
    """An internal contract (e.g. the closure identity) failed on output data."""
