"""Exception hierarchy shared by all modules."""


class BallisticError(Exception):
    """Base class for library errors."""


class DomainError(BallisticError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class RangeError(BallisticError, ValueError):
    """Argument outside the numerically supported range."""


class SingularityError(BallisticError, ZeroDivisionError):
    """Evaluation at (or too close to) a pole of a propagator or action.

    Attributes
    ----------
    time : float
        The offending time argument.
    """

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class AccuracyError(BallisticError, ArithmeticError):
    """A numerical procedure did not reach its tolerance.

    Attributes
    ----------
    estimate : object
        Best value obtained before giving up.
    error : float
        Error estimate attached to ``estimate``.
    """

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class ResonanceError(BallisticError, ArithmeticError):
    """Singular linear algebra caused by a (quasi-)bound state or resonance."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class DegeneracyError(BallisticError, ArithmeticError):
    """Stationary-phase evaluation at a degenerate (coalescing) saddle."""


class ContractError(BallisticError, ValueError):
    """Input violates a documented sign or causality contract."""
