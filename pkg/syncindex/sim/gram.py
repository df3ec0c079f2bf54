"""
Windowed Gram integrals of the error transition matrix.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.integrate

from syncindex import constants
from syncindex.exceptions import ConsensusReachedError, PreconditionError
from syncindex.graph import GraphSignal
from syncindex.lti import Plant
from syncindex.sim.dynamics import decay_rates, gamma_matrices, lyapunov_value
from syncindex.sim.transition import Propagator

logger = logging.getLogger(__name__)

# Samples per quadrature batch (even, so batches split on Simpson panel boundaries).
_CHUNK = 2048


@dataclass
class GramSet:
    """
    F_i(t) = integral over [t, t+T] of Phi(tau, t)^T Gamma_i Phi(tau, t) with
    Gamma_1 = I (x) (A^T P + P A), Gamma_2 = Lhat(tau) (x) P B B^T P,
    Gamma_3 = I (x) P and Gamma_4 = I (x) P B B^T P.
    """
    t: float
    T: float
    F1: np.ndarray = field(repr=False)
    F2: np.ndarray = field(repr=False)
    F3: np.ndarray = field(repr=False)
    F4: np.ndarray = field(repr=False)
    min_step: float = 0.0

    def __iter__(self):
        yield from (self.F1, self.F2, self.F3, self.F4)


def _sandwich(Phi: np.ndarray, Gamma: np.ndarray) -> np.ndarray:
    return np.swapaxes(Phi, -1, -2) @ Gamma @ Phi


def _simpson(Phi: np.ndarray, Gamma: np.ndarray, step: float) -> np.ndarray:
    """
    Composite Simpson integral of Phi^T Gamma Phi over samples with an even number
    of uniform steps. Gamma may be a single matrix or one per sample.
    """
    total = np.zeros(Phi.shape[1:])
    for start in range(0, len(Phi) - 1, _CHUNK):
        stop = min(start + _CHUNK, len(Phi) - 1)
        weights = Gamma if Gamma.ndim == 2 else Gamma[start:stop + 1]
        total += scipy.integrate.simpson(_sandwich(Phi[start:stop + 1], weights), dx=step, axis=0)
    return total


def _symmetric(F: np.ndarray) -> np.ndarray:
    return 0.5 * (F + F.T)


def gram_set(
    p: Plant, K: np.ndarray, P: np.ndarray, g: GraphSignal, t: float, T: float, dt: float = None
) -> GramSet:
    """
    Computes F_1..F_4 over [t, t+T] by composite Simpson quadrature.

    Each graph piece gets an even number of steps no longer than dt, shortened to
    1/(4 |M|) when the closed-loop matrix M is large.

    :raises PreconditionError: If T is not positive.
    :raises DivergenceError: If the transition matrix stops being finite.
    """
    if T <= 0:
        raise PreconditionError(f"Gram window must be positive, got T={T}")
    dt = constants.DT if dt is None else dt
    P = np.asarray(P, dtype=float)
    N = g.n_nodes
    Gamma1, Gamma3, Gamma4 = gamma_matrices(p.A, p.B, P, N)
    PB = P @ p.B
    coupling = PB @ PB.T

    propagator = Propagator(p, K, g, dt, augmented=True)
    F = [np.zeros_like(Gamma1) for _ in range(4)]
    min_step = np.inf
    for stretch in propagator.march(np.eye(p.n * N), t, t + T, stiff=True, even=True):
        Phi = stretch.values
        step = stretch.step
        min_step = min(min_step, step)
        if stretch.constant:
            Gamma2 = np.kron(stretch.laplacian(stretch.start), coupling)
        else:
            Gamma2 = np.stack([np.kron(L, coupling) for L in stretch.laplacians()])
        for F_i, Gamma in zip(F, (Gamma1, Gamma2, Gamma3, Gamma4)):
            F_i += _simpson(Phi, Gamma, step)
    logger.debug(f"Gram set on [{t}, {t + T}] with smallest step {min_step:.3g}")
    return GramSet(t, T, *(_symmetric(F_i) for F_i in F), min_step=min_step)


def integral_form_alpha(
    p: Plant, K: np.ndarray, P: np.ndarray, g: GraphSignal, e: np.ndarray, t: float, T: float, dt: float = None
) -> float:
    """
    Integral of alpha over [t, t+T] evaluated along Phi(s, t) e(t), without a
    simulated trajectory. Equals ln(V(t) / V(t+T)).

    :param e: Consensus error at time t.
    :raises ConsensusReachedError: If e is below the zero-error guard.
    """
    if T <= 0:
        raise PreconditionError(f"Window must be positive, got T={T}")
    dt = constants.DT if dt is None else dt
    e = np.asarray(e, dtype=float)
    if np.linalg.norm(e) <= constants.ZERO_ERROR_GUARD:
        raise ConsensusReachedError("Consensus error is below the zero-error guard")
    P = np.asarray(P, dtype=float)
    propagator = Propagator(p, K, g, dt, augmented=True)
    total = 0.0
    for stretch in propagator.march(e, t, t + T, stiff=True, even=True):
        alpha = decay_rates(stretch.values, np.asarray(stretch.laplacians()), p.A, propagator.BK, P)
        total += scipy.integrate.simpson(alpha, dx=stretch.step)
    return float(total)


def log_decay(P: np.ndarray, e_start: np.ndarray, e_end: np.ndarray) -> float:
    """
    ln(V(start) / V(end)).
    """
    return float(np.log(lyapunov_value(e_start, P) / lyapunov_value(e_end, P)))
