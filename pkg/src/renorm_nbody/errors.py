"""Exception and warning types shared across the package."""


class RenormError(Exception):
    """Base class for all errors raised by this package."""


class CollisionError(RenormError, ArithmeticError):
    """Two bodies coincide (or come closer than the configured floor)."""

    def __init__(self, message, pair=None, distance=None):
        super().__init__(message)
        self.pair = pair
        self.distance = distance


class DomainError(RenormError, ValueError):
    """An argument lies outside the domain of a formula."""


class EstimateError(RenormError):
    """Too few usable coefficients to estimate a radius of convergence."""


class ConvergenceError(RenormError):
    """A root finder or optimizer failed to bracket or converge."""


class MaxStepsError(RenormError):
    """An integration exceeded its step cap."""


class ParseError(RenormError, ValueError):
    """Malformed input file."""


class InvariantError(RenormError, ValueError):
    """Input parsed but violates a structural invariant."""


class StepWarning(UserWarning):
    """A constant step is large compared with the local radius of convergence."""
