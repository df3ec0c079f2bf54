"""
Closed-loop matrices, consensus error projection, Lyapunov value and decay rate.
"""
from typing import Tuple

import numpy as np

from syncindex import constants
from syncindex.exceptions import ConsensusReachedError, PreconditionError


def closed_loop_matrix(A: np.ndarray, BK: np.ndarray, L: np.ndarray) -> np.ndarray:
    """
    Stacked dynamics I_N (x) A - L (x) BK.
    """
    N = L.shape[0]
    return np.kron(np.eye(N), A) - np.kron(L, BK)


def error_projection(x: np.ndarray, n: int, N: int) -> np.ndarray:
    """
    Consensus error e = (J (x) I_n) x with J = I - (1/N) 1 1^T, i.e. every agent's
    state minus the agents' mean.

    :raises PreconditionError: If x does not have n*N entries.
    """
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != n * N:
        raise PreconditionError(f"State has {x.shape[-1]} entries, expected n*N = {n * N}")
    agents = x.reshape(x.shape[:-1] + (N, n))
    return (agents - agents.mean(axis=-2, keepdims=True)).reshape(x.shape)


def lyapunov_value(e: np.ndarray, P: np.ndarray) -> np.ndarray:
    """
    V = e^T (I_N (x) P) e. Accepts a single error vector or a stack of them.
    """
    n = P.shape[0]
    e = np.asarray(e, dtype=float)
    agents = e.reshape(e.shape[:-1] + (-1, n))
    return np.einsum("...ia,ab,...ib->...", agents, P, agents)


def alpha_at(e: np.ndarray, Lhat: np.ndarray, A: np.ndarray, P: np.ndarray, B: np.ndarray) -> float:
    """
    Instantaneous decay rate alpha with V' = -alpha V under K = B^T P:

        -e^T [I (x) (A^T P + P A) - 2 Lhat (x) P B B^T P] e / e^T (I (x) P) e

    :raises ConsensusReachedError: If |e| is below the zero-error guard.
    """
    e = np.asarray(e, dtype=float)
    if np.linalg.norm(e) <= constants.ZERO_ERROR_GUARD:
        raise ConsensusReachedError(f"Consensus error norm {np.linalg.norm(e)} is below the zero-error guard")
    N = Lhat.shape[0]
    PB = P @ B
    M = np.kron(np.eye(N), A.T @ P + P @ A) - 2 * np.kron(Lhat, PB @ PB.T)
    return float(-(e @ M @ e) / lyapunov_value(e, P))


def decay_rates(errors: np.ndarray, laplacians: np.ndarray, A: np.ndarray, BK: np.ndarray, P: np.ndarray) -> np.ndarray:
    """
    alpha for a stack of samples, for an arbitrary gain K:
    -2 e^T (I (x) P) (I (x) A - Lhat (x) BK) e / V. Equals alpha_at whenever K = B^T P.

    :param errors: (S, nN) consensus errors.
    :param laplacians: (S, N, N) augmented Laplacians active at each sample.
    """
    n = A.shape[0]
    E = errors.reshape(errors.shape[0], -1, n)
    drift = np.einsum("sia,ab,sib->s", E, P @ A, E)
    coupling = np.einsum("sij,sia,ab,sjb->s", laplacians, E, P @ BK, E, optimize=True)
    return -2.0 * (drift - coupling) / lyapunov_value(errors, P)


def gamma_matrices(A: np.ndarray, B: np.ndarray, P: np.ndarray, N: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Time-invariant Gram weights I (x) (A^T P + P A), I (x) P and I (x) P B B^T P.
    The coupling weight Lhat(t) (x) P B B^T P is built per sample.
    """
    identity = np.eye(N)
    PB = P @ B
    return (
        np.kron(identity, A.T @ P + P @ A),
        np.kron(identity, P),
        np.kron(identity, PB @ PB.T),
    )
