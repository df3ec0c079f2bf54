"""
Stabilizing solutions of A^T P + P A - kappa1 P B B^T P + Q = 0.
"""
import logging

import numpy as np
import scipy.linalg

from syncindex import constants
from syncindex.exceptions import ConditioningError, PreconditionError, RiccatiError
from syncindex.lti import Plant, is_observable, is_stabilizable

logger = logging.getLogger(__name__)


def care_residual(p: Plant, kappa1: float, Q: np.ndarray, P: np.ndarray) -> np.ndarray:
    """
    A^T P + P A - kappa1 P B B^T P + Q
    """
    PB = P @ p.B
    return p.A.T @ P + P @ p.A - kappa1 * PB @ PB.T + Q


def psd_sqrt(Q: np.ndarray) -> np.ndarray:
    """
    Symmetric square root of a positive semidefinite matrix.
    """
    w, U = scipy.linalg.eigh(Q)
    return (U * np.sqrt(np.clip(w, 0.0, None))) @ U.T


def _check_weight(Q: np.ndarray, n: int) -> np.ndarray:
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    if Q.shape != (n, n):
        raise PreconditionError(f"Q must be {n}x{n}, got {Q.shape}")
    scale = max(1.0, scipy.linalg.norm(Q))
    if scipy.linalg.norm(Q - Q.T) > constants.SYMMETRY_TOL * scale:
        raise PreconditionError("Q is not symmetric")
    Q = 0.5 * (Q + Q.T)
    if scipy.linalg.eigvalsh(Q)[0] < -constants.SYMMETRY_TOL * scale:
        raise PreconditionError("Q is not positive semidefinite")
    return Q


def _newton(p: Plant, kappa1: float, Q: np.ndarray, P: np.ndarray) -> np.ndarray:
    """
    Kleinman iterations from a stabilizing guess.
    """
    BBt = p.B @ p.B.T
    tolerance = constants.NEWTON_TOL * (1.0 + scipy.linalg.norm(Q))
    residual = scipy.linalg.norm(care_residual(p, kappa1, Q, P))
    for iteration in range(constants.NEWTON_MAX_ITER):
        if residual <= tolerance:
            break
        closed = p.A - kappa1 * BBt @ P
        candidate = scipy.linalg.solve_continuous_lyapunov(closed.T, -(Q + kappa1 * P @ BBt @ P))
        candidate = 0.5 * (candidate + candidate.T)
        candidate_residual = scipy.linalg.norm(care_residual(p, kappa1, Q, candidate))
        logger.debug(f"Newton iteration {iteration}: residual {candidate_residual:.3e}")
        if not candidate_residual < residual:
            break
        P, residual = candidate, candidate_residual
    if residual > tolerance:
        logger.warning(f"Riccati refinement stopped at residual {residual:.3e} (target {tolerance:.3e}, kappa1={kappa1})")
    return P


def solve_care(p: Plant, kappa1: float, Q: np.ndarray = None, check: bool = True) -> np.ndarray:
    """
    Stabilizing solution of A^T P + P A - kappa1 P B B^T P + Q = 0.

    Takes the stable invariant subspace [X; Y] of the Hamiltonian
    [[A, -kappa1 B B^T], [-Q, -A^T]] from an ordered real Schur decomposition,
    forms P = Y X^-1 and refines it with Newton iterations.

    :param p: Agent model.
    :param kappa1: Positive coefficient of the quadratic term.
    :param Q: Positive semidefinite weight (identity when omitted).
    :param check: Test stabilizability of (A, B) and observability of (A, Q^1/2) first.
    :raises PreconditionError: For a non-positive kappa1, an invalid Q or (A, Q^1/2) not observable.
    :raises RiccatiError: If (A, B) is not stabilizable or no stabilizing solution exists.
    :raises ConditioningError: If the invariant subspace basis is too ill-conditioned.
    """
    if not kappa1 > 0:
        raise PreconditionError(f"kappa1 must be positive, got {kappa1}")
    n = p.n
    Q = np.eye(n) if Q is None else _check_weight(Q, n)
    if check:
        if not is_stabilizable(p):
            raise RiccatiError("(A, B) is not stabilizable", kappa1=kappa1)
        if not is_observable(p.A, psd_sqrt(Q)):
            raise PreconditionError("(A, Q^1/2) is not observable")

    H = np.block([[p.A, -kappa1 * p.B @ p.B.T], [-Q, -p.A.T]])
    _, Z, sdim = scipy.linalg.schur(H, output="real", sort="lhp")
    if sdim != n:
        raise RiccatiError(f"Hamiltonian has {sdim} stable eigenvalues instead of {n}", kappa1=kappa1)
    X, Y = Z[:n, :n], Z[n:, :n]
    condition = np.linalg.cond(X)
    if not condition < constants.MAX_BASIS_CONDITION:
        raise ConditioningError("Stable invariant subspace basis is ill-conditioned", condition, kappa1=kappa1)
    P = scipy.linalg.solve(X.T, Y.T).T
    P = 0.5 * (P + P.T)
    P = _newton(p, kappa1, Q, P)

    closed = scipy.linalg.eigvals(p.A - kappa1 * p.B @ p.B.T @ P)
    if np.any(closed.real >= 0):
        raise RiccatiError("Riccati solution is not stabilizing", kappa1=kappa1)
    logger.debug(f"Solved Riccati equation for kappa1={kappa1}: lambda(P) in [{scipy.linalg.eigvalsh(P)[0]:.4g}, {scipy.linalg.eigvalsh(P)[-1]:.4g}]")
    return P
