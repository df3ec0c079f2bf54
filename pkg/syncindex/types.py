"""
Home for constants and types.
"""

from enum import IntEnum, auto


class ProfileKind(IntEnum):
    """Closed forms a weight segment can take."""
    constant = auto()
    affine = auto()
    sinusoid = auto()


class Certificate(IntEnum):
    """
    Sufficient condition that certified a weight schedule's precompactness.
    """
    none = 0
    periodic = auto()            # one-element shift family
    dwell = auto()               # piecewise constant with a positive dwell time
    lipschitz_jump = auto()      # slope bound and jump/dwell ratio bound
    uniform_continuity = auto()  # continuous with bounded slope


class Classification(IntEnum):
    """Empirical consensus verdict of a trajectory."""
    exponential = auto()
    asymptotic_only = auto()
    divergent = auto()
    inconclusive = auto()


class DesignKind(IntEnum):
    """How a scenario obtains its feedback gain."""
    explicit = auto()
    riccati = auto()
    neutral_lyapunov = auto()
    algorithm1 = auto()
