"""Exception types raised by the solvers and integral evaluators."""


class TFLimitError(Exception):
    """Base class for all package errors."""


class NonConvergence(TFLimitError):
    """Newton iteration stalled before reaching the requested residual."""

    def __init__(self, message, iterations=None, residual=None):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


class WindowTooSmall(TFLimitError):
    """Boundary tail values are inconsistent with the interior solve."""


class NegativeProfile(TFLimitError):
    """Newton iterate left the positive cone and could not be recovered."""


class SingularOperator(TFLimitError):
    """Discretized linear operator is numerically singular."""


class MissingPrior(TFLimitError):
    """A required lower-order correction function was not supplied."""


class TailTooNoisy(TFLimitError):
    """Least-squares tail fit residual exceeds the trust threshold."""


class TailBudgetExceeded(TFLimitError):
    """Estimated tail remainder of a regularized integral exceeds tolerance."""


class ExtrapolationUnstable(TFLimitError):
    """Successive limit estimates disagree beyond the requested tolerance."""


class ConsistencyFailure(TFLimitError):
    """An exact algebraic consistency condition was violated."""


class GridMismatch(TFLimitError):
    """Field resampling between grids exceeds the accuracy tolerance."""


class CaseMismatch(TFLimitError):
    """Integrand decay rate is insufficient for the requested expansion case."""


class QuadratureBudget(TFLimitError):
    """Adaptive quadrature could not reach the requested tolerance."""


class SolverFailure(TFLimitError):
    """A solver failed inside a sweep; carries the partial results."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial
