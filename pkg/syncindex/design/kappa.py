"""
Estimates of kappa2, the largest coefficient with F2 >= (kappa2 / 2) F4.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np
import scipy.linalg

from syncindex import constants
from syncindex.exceptions import PreconditionError
from syncindex.graph import GraphSignal
from syncindex.graph.connectivity import window_starts
from syncindex.lti import Plant
from syncindex.sim import gram_set

logger = logging.getLogger(__name__)

METHODS = ("ratio", "pencil")


def _symmetric(F: np.ndarray, name: str) -> np.ndarray:
    F = np.atleast_2d(np.asarray(F, dtype=float))
    if F.ndim != 2 or F.shape[0] != F.shape[1]:
        raise PreconditionError(f"{name} must be square, got shape {F.shape}")
    if scipy.linalg.norm(F - F.T) > constants.SYMMETRY_TOL * max(1.0, scipy.linalg.norm(F)):
        raise PreconditionError(f"{name} is not symmetric")
    return 0.5 * (F + F.T)


def _ratio(F2: np.ndarray, F4: np.ndarray) -> float:
    high = scipy.linalg.eigvalsh(F4)[-1]
    if high <= 0:
        return math.inf
    low = scipy.linalg.eigvalsh(F2)[0]
    return 2.0 * max(low, 0.0) / high


def _pencil(F2: np.ndarray, F4: np.ndarray) -> float:
    # Whiten by the pseudo-inverse square root of F2; F4 must vanish where F2 does.
    w, U = scipy.linalg.eigh(F2)
    tol = constants.RANK_TOL * max(w[-1], 0.0)
    keep = w > tol
    null = U[:, ~keep]
    F4_norm = scipy.linalg.norm(F4, 2)
    if null.size and scipy.linalg.norm(null.T @ F4 @ null, 2) > constants.RANK_TOL * max(F4_norm, 1e-300):
        return 0.0
    if F4_norm == 0:
        return math.inf
    S = U[:, keep] / np.sqrt(w[keep])
    high = scipy.linalg.eigvalsh(S.T @ F4 @ S)[-1]
    if high <= 0:
        return math.inf
    return 2.0 / high


def kappa2_estimate(F2: np.ndarray, F4: np.ndarray, method: str = "ratio") -> float:
    """
    Coefficient kappa2 with F2 - (kappa2 / 2) F4 positive semidefinite.

    "ratio" gives the conservative 2 lambda_min(F2) / lambda_max(F4).
    "pencil" gives the largest such kappa2 from the whitened pencil.
    Both return math.inf when F4 vanishes.

    :raises PreconditionError: For asymmetric or mismatched inputs or an unknown method.
    """
    F2 = _symmetric(F2, "F2")
    F4 = _symmetric(F4, "F4")
    if F2.shape != F4.shape:
        raise PreconditionError(f"F2 and F4 differ in shape: {F2.shape} vs {F4.shape}")
    if method == "ratio":
        return _ratio(F2, F4)
    if method == "pencil":
        return _pencil(F2, F4)
    raise PreconditionError(f"Unknown kappa2 method '{method}'. Expected one of {METHODS}")


@dataclass
class Kappa2Estimate:
    """
    kappa2 over a grid of window starts (a single start for periodic graphs).
    grid rows are (window start, kappa2, lambda_min(F2), lambda_max(F4)).
    """
    kappa2: float
    grid: List[Tuple[float, float, float, float]] = field(default_factory=list)
    stride: float = None
    periodic: bool = False
    lambda_min_F2: float = math.nan
    lambda_max_F4: float = math.nan


def kappa2_over_grid(
    p: Plant,
    K: np.ndarray,
    P: np.ndarray,
    g: GraphSignal,
    T: float,
    dt: float = None,
    horizon: float = None,
    stride: float = None,
    method: str = "ratio",
) -> Kappa2Estimate:
    """
    Evaluates kappa2 from F2(t) and F4(t) with window T.

    Periodic graphs are evaluated at t = 0 over one window only. Otherwise every
    window start on the stride grid (default T/10) within the horizon is evaluated
    and the minimum is kept.

    :raises PreconditionError: If an aperiodic graph is given without a horizon.
    """
    periodic = g.period is not None
    if periodic:
        starts = [0.0]
    else:
        if horizon is None:
            raise PreconditionError("Aperiodic graphs need a horizon to estimate kappa2 on")
        stride = constants.STRIDE_FRACTION * T if stride is None else stride
        starts = window_starts(T, horizon, stride)

    grid = []
    best = None
    for t in starts:
        grams = gram_set(p, K, P, g, t, T, dt)
        kappa2 = kappa2_estimate(grams.F2, grams.F4, method)
        row = (t, kappa2, scipy.linalg.eigvalsh(grams.F2)[0], scipy.linalg.eigvalsh(grams.F4)[-1])
        grid.append(row)
        if best is None or kappa2 < best[0]:
            best = row[1:]
    logger.debug(f"kappa2 over {len(grid)} window starts: {best[0]:.6g}")
    return Kappa2Estimate(
        kappa2=best[0],
        grid=grid,
        stride=None if periodic else stride,
        periodic=periodic,
        lambda_min_F2=best[1],
        lambda_max_F4=best[2],
    )
