"""
Riccati and neutral designs with kappa2 attached, and the gamma sweep that finds
kappa2 for Riccati designs.
"""
from __future__ import annotations

import logging
import math
import multiprocessing
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
import scipy.linalg

from syncindex import constants
from syncindex.design.gain import GainDesign, check_lyapunov_matrix
from syncindex.design.kappa import Kappa2Estimate, kappa2_over_grid
from syncindex.design.lyapunov import solve_neutral_lyapunov
from syncindex.design.riccati import care_residual, solve_care
from syncindex.exceptions import PreconditionError
from syncindex.graph import GraphSignal
from syncindex.lti import Plant, is_controllable, is_neutrally_stable
from syncindex.types import DesignKind

logger = logging.getLogger(__name__)

# Extra sweep steps tried after kappa2 settles, looking for an index >= 1.
_EXTENSION_STEPS = 3


def design_riccati(
    p: Plant,
    kappa1: float,
    Q: np.ndarray = None,
    g: GraphSignal = None,
    T: float = None,
    dt: float = None,
    horizon: float = None,
    stride: float = None,
    method: str = "ratio",
) -> GainDesign:
    """
    K = B^T P with P the stabilizing Riccati solution for (kappa1, Q).
    kappa2 is estimated when a graph and window length are given.
    """
    Q = np.eye(p.n) if Q is None else np.asarray(Q, dtype=float)
    P = solve_care(p, kappa1, Q)
    residual = float(scipy.linalg.norm(care_residual(p, kappa1, Q, P)))
    design = GainDesign(K=p.B.T @ P, P=P, Q=Q, kappa1=kappa1, kind=DesignKind.riccati, residual=residual)
    if g is not None and T is not None:
        design = design.with_kappa2(kappa2_over_grid(p, design.K, P, g, T, dt, horizon, stride, method))
    return design


def design_neutral(
    p: Plant,
    g: GraphSignal = None,
    T: float = None,
    P: np.ndarray = None,
    dt: float = None,
    horizon: float = None,
    stride: float = None,
    method: str = "ratio",
) -> GainDesign:
    """
    K = B^T P with A^T P + P A = 0 for a neutrally stable A.

    kappa1 is free for such designs. It is set equal to kappa2 (index 1) and Q to
    kappa1 P B B^T P, which makes P solve the Riccati equation as well.

    :param P: Use this solution instead of computing one.
    :raises NotNeutrallyStableError: If A is not neutrally stable and P is not given.
    :raises PreconditionError: If the given P does not solve A^T P + P A = 0.
    """
    if P is None:
        P = solve_neutral_lyapunov(p.A)
    else:
        P = check_lyapunov_matrix(P, p.n)
    residual = float(scipy.linalg.norm(p.A.T @ P + P @ p.A))
    if residual > 1e-8 * scipy.linalg.norm(P):
        raise PreconditionError(f"P does not solve A^T P + P A = 0 (residual {residual:.3e})")
    design = GainDesign(K=p.B.T @ P, P=P, kind=DesignKind.neutral_lyapunov, residual=residual)
    if g is None or T is None:
        return design
    design = design.with_kappa2(kappa2_over_grid(p, design.K, P, g, T, dt, horizon, stride, method))
    kappa2 = design.kappa2
    if 0 < kappa2 < math.inf:
        PB = P @ p.B
        design = GainDesign(
            K=design.K, P=P, Q=kappa2 * PB @ PB.T, kappa1=kappa2, kappa2=kappa2,
            kind=design.kind, residual=residual, kappa2_detail=design.kappa2_detail,
        )
    else:
        logger.warning(f"kappa2 = {kappa2}; no kappa1 convention applies")
    return design


@dataclass
class SweepEntry:
    k: int
    gamma: float
    P: np.ndarray = field(repr=False)
    kappa2: float
    lambda_min_scaled_P: float
    lambda_max_scaled_P: float = 1.0
    estimate: Optional[Kappa2Estimate] = field(default=None, repr=False)

    @property
    def sync_index(self) -> float:
        return self.kappa2 / self.gamma


@dataclass
class GammaSweep:
    """
    Riccati solutions P for gamma_k = 1/k with Q = I and the kappa2 each achieves.
    """
    entries: List[SweepEntry] = field(default_factory=list)
    converged: bool = False

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def gammas(self) -> List[float]:
        return [entry.gamma for entry in self.entries]

    @property
    def P_list(self) -> List[np.ndarray]:
        return [entry.P for entry in self.entries]

    @property
    def kappa2_list(self) -> List[float]:
        return [entry.kappa2 for entry in self.entries]

    @property
    def min_eig_scaled(self) -> List[float]:
        return [entry.lambda_min_scaled_P for entry in self.entries]

    def best(self) -> Optional[SweepEntry]:
        """
        Entry with the largest synchronization index.
        """
        if not self.entries:
            return None
        return max(self.entries, key=lambda entry: entry.sync_index)


def _sweep_entry(args) -> SweepEntry:
    p, g, T, k, dt, horizon, stride, method = args
    gamma = 1.0 / k
    P = solve_care(p, gamma, np.eye(p.n))
    estimate = kappa2_over_grid(p, p.B.T @ P, P, g, T, dt, horizon, stride, method)
    eigenvalues = scipy.linalg.eigvalsh(P)
    logger.debug(f"k={k}: gamma={gamma:.6g}, kappa2={estimate.kappa2:.6g}")
    return SweepEntry(k, gamma, P, estimate.kappa2, eigenvalues[0] / eigenvalues[-1], estimate=estimate)


def _settled(previous: SweepEntry, current: SweepEntry) -> bool:
    if not (math.isfinite(previous.kappa2) and math.isfinite(current.kappa2)):
        return previous.kappa2 == current.kappa2
    return abs(current.kappa2 - previous.kappa2) <= constants.KAPPA2_RTOL * current.kappa2


def algorithm1_search(
    p: Plant,
    g: GraphSignal,
    T: float,
    k_max: int = constants.DEFAULT_K_MAX,
    dt: float = None,
    horizon: float = None,
    stride: float = None,
    method: str = "ratio",
    jobs: int = 1,
) -> Tuple[GammaSweep, GainDesign]:
    """
    Finds kappa2 by sweeping gamma_k = 1/k, k = 1..k_max.

    Each step solves the Riccati equation with (gamma_k, I), sets K = B^T P and
    estimates kappa2 from F2 and F4. The sweep stops once kappa2 changes by at most
    1e-4 relative. The returned design is the step with the largest synchronization
    index kappa2 / gamma_k. When kappa2 settles while every index is below 1, a few
    more steps from k = ceil(1 / kappa2) on are tried. Neutrally stable plants are
    routed to design_neutral and come back with an empty sweep.

    :param jobs: Worker processes; steps are computed in batches and merged in order.
    :raises PreconditionError: If k_max < 1 or (A, B) is not controllable.
    :raises RiccatiError: From the first failing step, naming its gamma.
    """
    if k_max < 1:
        raise PreconditionError(f"k_max must be at least 1, got {k_max}")
    if not is_controllable(p):
        raise PreconditionError("The gamma sweep needs a controllable (A, B)")
    if is_neutrally_stable(p.A):
        logger.info("Neutrally stable plant: using the Lyapunov design instead of the gamma sweep")
        return GammaSweep(), design_neutral(p, g, T, dt=dt, horizon=horizon, stride=stride, method=method)

    sweep = GammaSweep()
    arguments = [(p, g, T, k, dt, horizon, stride, method) for k in range(1, k_max + 1)]
    pool = multiprocessing.Pool(jobs) if jobs > 1 else None
    try:
        for start in range(0, k_max, max(jobs, 1)):
            batch = arguments[start:start + max(jobs, 1)]
            entries = pool.map(_sweep_entry, batch) if pool else [_sweep_entry(args) for args in batch]
            for entry in entries:
                if sweep.entries and _settled(sweep.entries[-1], entry):
                    sweep.entries.append(entry)
                    sweep.converged = True
                    break
                sweep.entries.append(entry)
            if sweep.converged:
                break
    finally:
        if pool:
            pool.close()
            pool.join()
    logger.info(f"Gamma sweep ran {len(sweep)} steps (converged={sweep.converged})")

    # A settled kappa2 certifies kappa1 = 1/j for the first j with 1/j <= kappa2.
    best = sweep.best()
    if sweep.converged and best.sync_index < 1 and math.isfinite(sweep.entries[-1].kappa2) and sweep.entries[-1].kappa2 > 0:
        j = math.ceil(1.0 / sweep.entries[-1].kappa2)
        for k in range(max(j, len(sweep) + 1), min(j + _EXTENSION_STEPS, k_max) + 1):
            entry = _sweep_entry((p, g, T, k, dt, horizon, stride, method))
            sweep.entries.append(entry)
            if entry.sync_index >= 1:
                break
        best = sweep.best()
    residual = float(scipy.linalg.norm(care_residual(p, best.gamma, np.eye(p.n), best.P)))
    design = GainDesign(
        K=p.B.T @ best.P,
        P=best.P,
        Q=np.eye(p.n),
        kappa1=best.gamma,
        kappa2=best.kappa2,
        kind=DesignKind.algorithm1,
        residual=residual,
        kappa2_detail=best.estimate,
    )
    return sweep, design


def closest_sweep_entry(sweep: GammaSweep, P_target: np.ndarray) -> Tuple[SweepEntry, float]:
    """
    Sweep step whose P is nearest a target matrix, with the relative Frobenius distance.

    :raises PreconditionError: If the sweep is empty.
    """
    if not sweep.entries:
        raise PreconditionError("Sweep is empty")
    P_target = np.asarray(P_target, dtype=float)
    scale = scipy.linalg.norm(P_target)
    distances = [scipy.linalg.norm(entry.P - P_target) / scale for entry in sweep.entries]
    index = int(np.argmin(distances))
    return sweep.entries[index], float(distances[index])
