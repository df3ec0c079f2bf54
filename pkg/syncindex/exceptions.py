class SyncIndexError(Exception):
    """Base exception for syncindex exceptions."""
    pass


class OutOfDomainError(SyncIndexError):
    """
    Raised when a time (or time window) falls outside the span a weight schedule
    was declared on.
    """


class PreconditionError(SyncIndexError, ValueError):
    """
    Raised when the arguments of an operation violate its preconditions.

    e.g. A trivial node subset for the cut bound or a non-positive step size.
    """


class RiccatiError(SyncIndexError):
    """
    Raised when the algebraic Riccati equation has no stabilizing solution.
    """

    def __init__(self, message: str, kappa1: float = None):
        if kappa1 is not None:
            message = f"{message} (kappa1={kappa1!r})"
        super().__init__(message)
        self.kappa1 = kappa1


class ConditioningError(RiccatiError):
    """
    Raised when the basis of the stable invariant subspace is too ill-conditioned
    to recover the Riccati solution from.
    """

    def __init__(self, message: str, condition: float, kappa1: float = None):
        super().__init__(f"{message} (condition estimate {condition:.3e})", kappa1=kappa1)
        self.condition = condition


class NotNeutrallyStableError(SyncIndexError):
    """
    Raised when a system matrix has an eigenvalue off the imaginary axis or a
    defective imaginary-axis eigenvalue.
    """

    def __init__(self, message: str, eigenvalue: complex):
        super().__init__(f"{message}: {eigenvalue!r}")
        self.eigenvalue = eigenvalue


class DivergenceError(SyncIndexError):
    """
    Raised when an integrated state stops being finite.
    """

    def __init__(self, message: str, last_finite_time: float):
        super().__init__(f"{message} (last finite state at t={last_finite_time!r})")
        self.last_finite_time = last_finite_time


class ConsensusReachedError(SyncIndexError):
    """
    Raised when the decay rate is requested for a consensus error that is
    numerically zero. Callers treat the sample as already converged.
    """


class NotApplicableError(SyncIndexError):
    """
    Raised when an analysis does not apply to the given input.

    e.g. Requesting an uncontrollable-mode witness for a controllable plant.
    """


class ScenarioError(SyncIndexError):
    """
    Raised when a scenario file cannot be parsed or fails validation.
    """
