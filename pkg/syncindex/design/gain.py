"""
Feedback gain designs and the synchronization index.
"""
from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from syncindex import constants
from syncindex.design.kappa import Kappa2Estimate
from syncindex.exceptions import PreconditionError
from syncindex.lti import Plant
from syncindex.types import DesignKind

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class GainDesign:
    """
    Feedback gain K with its Lyapunov matrix P.

    Riccati designs carry the weight Q and the coefficient kappa1. Once kappa2 is
    estimated the synchronization index kappa2 / kappa1 is available.
    """
    K: np.ndarray
    P: Optional[np.ndarray] = None
    Q: Optional[np.ndarray] = None
    kappa1: Optional[float] = None
    kappa2: Optional[float] = None
    kind: DesignKind = DesignKind.explicit
    residual: Optional[float] = None
    kappa2_detail: Optional[Kappa2Estimate] = dataclasses.field(default=None, repr=False, compare=False)

    def __str__(self) -> str:
        index = "n/a" if self.sync_index is None else f"{self.sync_index:.6g}"
        return f"{self.kind.name} design: kappa1={self.kappa1}, kappa2={self.kappa2}, sync index={index}"

    @property
    def sync_index(self) -> Optional[float]:
        if self.kappa1 is None or self.kappa2 is None:
            return None
        return self.kappa2 / self.kappa1

    @property
    def index_ok(self) -> bool:
        index = self.sync_index
        return index is not None and index >= 1.0

    def with_kappa2(self, estimate: Kappa2Estimate) -> "GainDesign":
        return dataclasses.replace(self, kappa2=estimate.kappa2, kappa2_detail=estimate)


def check_lyapunov_matrix(P, n: int) -> np.ndarray:
    """
    Validates a symmetric positive definite n x n matrix.

    :raises PreconditionError: If P has the wrong shape or is not symmetric positive definite.
    """
    P = np.atleast_2d(np.asarray(P, dtype=float))
    if P.shape != (n, n):
        raise PreconditionError(f"P must be {n}x{n}, got {P.shape}")
    if scipy.linalg.norm(P - P.T) > constants.SYMMETRY_TOL * max(1.0, scipy.linalg.norm(P)):
        raise PreconditionError("P is not symmetric")
    P = 0.5 * (P + P.T)
    if scipy.linalg.eigvalsh(P)[0] <= 0:
        raise PreconditionError("P is not positive definite")
    return P


def design_explicit(p: Plant, K=None, P=None) -> GainDesign:
    """
    Design from a given gain and/or Lyapunov matrix. K defaults to B^T P.

    :raises PreconditionError: If neither is given or a shape is wrong.
    """
    if K is None and P is None:
        raise PreconditionError("An explicit design needs K or P")
    if P is not None:
        P = check_lyapunov_matrix(P, p.n)
    if K is None:
        K = p.B.T @ P
    K = np.atleast_2d(np.asarray(K, dtype=float))
    if K.shape != (p.m, p.n):
        raise PreconditionError(f"K must be {p.m}x{p.n}, got {K.shape}")
    if P is not None and not np.allclose(K, p.B.T @ P):
        logger.info("Explicit gain differs from B^T P; alpha uses the general closed-loop form")
    return GainDesign(K=K, P=P, kind=DesignKind.explicit)
