"""
Positive definite solutions of A^T P + P A = 0 for neutrally stable A.
"""
import logging

import numpy as np
import scipy.linalg

from syncindex import constants
from syncindex.exceptions import NotNeutrallyStableError, PreconditionError

logger = logging.getLogger(__name__)

# Largest eigenvector basis condition accepted as semisimple.
_MAX_EIGENBASIS_CONDITION = 1e8


def _real_eigenbasis(A: np.ndarray) -> np.ndarray:
    """
    Real basis W with W^-1 A W skew-symmetric: real eigenvectors as they are and
    the real and imaginary parts of one eigenvector from each conjugate pair.

    :raises NotNeutrallyStableError: If A has an eigenvalue off the imaginary axis or is defective.
    """
    n = A.shape[0]
    scale = max(1.0, scipy.linalg.norm(A, 2))
    w, V = scipy.linalg.eig(A)
    worst = int(np.argmax(np.abs(w.real)))
    if abs(w[worst].real) > np.sqrt(constants.RANK_TOL) * scale:
        raise NotNeutrallyStableError("Eigenvalue off the imaginary axis", complex(w[worst]))
    condition = np.linalg.cond(V)
    if not condition < _MAX_EIGENBASIS_CONDITION:
        raise NotNeutrallyStableError(f"Defective eigenvalue (eigenbasis condition {condition:.3e})", complex(w[worst]))

    columns = []
    imaginary_tol = np.sqrt(constants.RANK_TOL) * scale
    for value, v in zip(w, V.T):
        if abs(value.imag) <= imaginary_tol:
            v = v * np.exp(-1j * np.angle(v[np.argmax(np.abs(v))]))
            columns.append(v.real)
        elif value.imag > 0:
            columns.extend((v.real, v.imag))
    W = np.column_stack(columns)
    if W.shape != (n, n):
        raise NotNeutrallyStableError("Unpaired complex eigenvalue", complex(w[worst]))
    return W


def solve_neutral_lyapunov(A, scale: float = None) -> np.ndarray:
    """
    Symmetric positive definite P with A^T P + P A = 0.

    Builds P = T^T T from the real transformation T making T A T^-1 skew-symmetric.

    :param A: Neutrally stable system matrix (imaginary-axis, semisimple spectrum).
    :param scale: Rescale P so its largest eigenvalue equals this.
    :raises NotNeutrallyStableError: Naming the offending eigenvalue.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.shape[0] != A.shape[1]:
        raise PreconditionError(f"A must be square, got shape {A.shape}")
    n = A.shape[0]
    if not np.any(A):
        P = np.eye(n)
    else:
        T = scipy.linalg.inv(_real_eigenbasis(A))
        P = T.T @ T
        P = 0.5 * (P + P.T)
        P /= scipy.linalg.eigvalsh(P)[-1]
    if scale is not None:
        if not scale > 0:
            raise PreconditionError(f"Scale must be positive, got {scale}")
        P = P * (scale / scipy.linalg.eigvalsh(P)[-1])

    residual = scipy.linalg.norm(A.T @ P + P @ A)
    if residual > 1e-8 * scipy.linalg.norm(P):
        raise NotNeutrallyStableError(f"Lyapunov residual {residual:.3e} too large", complex(scipy.linalg.eigvals(A)[0]))
    logger.debug(f"Neutral Lyapunov solution with residual {residual:.3e}")
    return P
