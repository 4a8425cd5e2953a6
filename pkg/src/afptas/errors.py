"""Exception types raised by the solver pipeline."""


class AfptasError(Exception):
    """Base class for all errors raised by this package."""


class InvalidItem(AfptasError):
    pass


class InvalidCardinality(AfptasError):
    pass


class InvalidEpsilon(AfptasError):
    pass


class NumericalInstability(AfptasError):
    """The LP backend failed to return an optimal basic solution."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ConvergenceFailure(AfptasError):
    """Column generation hit its iteration cap.

    ``best`` holds the last restricted-master solution so callers can still
    inspect it.
    """

    def __init__(self, message, best=None, iterations=0):
        super().__init__(message)
        self.best = best
        self.iterations = iterations


class InternalInvariantViolation(AfptasError):
    """A structural invariant that the LP guarantees did not hold."""


class TooLarge(AfptasError):
    """Instance exceeds the size cap of an exact oracle."""
