"""Exception hierarchy shared across the package."""


class PermError(Exception):
    """Base class for all domain errors raised by permbounds."""


class MatrixParseError(PermError, ValueError):
    """Text could not be parsed as a matrix in the declared format."""


class NegativeEntryError(PermError, ValueError):
    pass


class NonSquareError(PermError, ValueError):
    """Matrix is not square (includes ragged rows)."""


class ZeroRowError(PermError, ValueError):
    pass


class ZeroVectorError(PermError, ValueError):
    pass


class DimensionTooLargeError(PermError, ValueError):
    """Input exceeds a hard dimension guard of an exact evaluator."""


class NumericInstabilityError(PermError, ArithmeticError):
    """Cancellation produced a result that cannot be trusted."""


class NotStochasticError(PermError, ValueError):
    pass


class ZeroPermanentError(PermError, ValueError):
    """The positive support admits no perfect matching."""


class ConvergenceError(PermError, RuntimeError):
    """An iterative routine failed to reach its tolerance.

    ``result`` carries the best-so-far value for diagnostics.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result
