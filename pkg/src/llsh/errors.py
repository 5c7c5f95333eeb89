"""Exception hierarchy shared by all llsh modules."""


class LlshError(Exception):
    """Base class for all llsh errors."""


class InvalidArgumentError(LlshError, ValueError):
    """An argument violates a documented precondition."""


class DegenerateBasisError(LlshError):
    """Basis is singular or numerically too close to singular."""


class ReductionError(LlshError):
    """Basis reduction failed to terminate within its iteration guard."""


class BudgetExceededError(LlshError):
    """A search exceeded its node/evaluation budget.

    Carries the best result found so far in ``best`` (may be None).
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class EstimationError(LlshError):
    """A Monte Carlo estimation failed (e.g. too many decoder failures)."""


class AccuracyError(LlshError):
    """Quadrature did not converge to the required accuracy.

    Carries the partial value in ``partial`` (log-space) and the error
    estimate in ``err_est``.
    """

    def __init__(self, message, partial=None, err_est=None):
        super().__init__(message)
        self.partial = partial
        self.err_est = err_est


class InsufficientDataError(LlshError):
    """Not enough usable data points to produce an estimate."""


class GenerationError(LlshError):
    """Synthetic dataset generation cannot satisfy its separation contract."""


class BuildError(LlshError):
    """Index construction failed; ``point_id`` names the offending point."""

    def __init__(self, message, point_id=None):
        super().__init__(message)
        self.point_id = point_id
