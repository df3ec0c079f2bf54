"""
Piecewise propagation of the closed-loop dynamics over a graph signal.

Steps never straddle a graph breakpoint. Pieces on which every weight is constant
are advanced with exact matrix exponential steps, the rest with classical RK4.
"""
from __future__ import annotations

import functools
import logging
import math
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np
import scipy.linalg

from syncindex import constants
from syncindex.exceptions import DivergenceError, PreconditionError
from syncindex.graph import GraphSignal, augmented_laplacian
from syncindex.lti import Plant
from syncindex.sim.dynamics import closed_loop_matrix

logger = logging.getLogger(__name__)


@functools.lru_cache(maxsize=constants.EXPONENTIAL_CACHE_SIZE)
def _expm_cached(data: bytes, size: int, h: float) -> np.ndarray:
    E = scipy.linalg.expm(np.frombuffer(data).reshape(size, size) * h)
    E.setflags(write=False)
    return E


def step_exponential(M: np.ndarray, h: float) -> np.ndarray:
    """
    Read-only expm(M h). Periodic graphs revisit the same constant pieces, so the
    most recent exponentials are kept in a bounded LRU cache.
    """
    M = np.ascontiguousarray(M, dtype=float)
    return _expm_cached(M.tobytes(), M.shape[0], float(h))


@dataclass
class Stretch:
    """
    Samples of the propagated quantity on one graph piece [start, end].
    ``values[0]`` is the value at ``start`` and ``values[-1]`` the value at ``end``.
    """
    start: float
    end: float
    constant: bool
    times: np.ndarray
    values: np.ndarray
    laplacian: Callable[[float], np.ndarray]

    @property
    def step(self) -> float:
        return (self.end - self.start) / (len(self.times) - 1)

    def laplacians(self) -> np.ndarray:
        """
        Laplacian (augmented when propagating the error) at every sample.
        """
        if self.constant:
            L = self.laplacian(self.start)
            return np.broadcast_to(L, (len(self.times),) + L.shape)
        return np.stack([self.laplacian(t) for t in self.times])


class Propagator:
    """
    Advances Y' = (I (x) A - L(t) (x) BK) Y for a vector or matrix Y.

    :param p: Agent model.
    :param K: Feedback gain.
    :param g: Graph signal.
    :param dt: Largest step.
    :param augmented: Use the augmented Laplacian (error dynamics) instead of L (agent states).
    """

    def __init__(self, p: Plant, K: np.ndarray, g: GraphSignal, dt: float = constants.DT, augmented: bool = True):
        if dt <= 0:
            raise PreconditionError(f"Step size must be positive, got {dt}")
        K = np.atleast_2d(np.asarray(K, dtype=float))
        if K.shape != (p.m, p.n):
            raise PreconditionError(f"Gain must be {p.m}x{p.n}, got {K.shape}")
        self.plant = p
        self.K = K
        self.BK = p.B @ K
        self.graph = g
        self.dt = dt
        self.augmented = augmented

    def laplacian(self, t: float, anchor: float = None) -> np.ndarray:
        L = self.graph.laplacian_at(t, anchor)
        return augmented_laplacian(L) if self.augmented else L

    def matrix(self, L: np.ndarray) -> np.ndarray:
        return closed_loop_matrix(self.plant.A, self.BK, L)

    def _steps(self, length: float, M: np.ndarray, stiff: bool, even: bool) -> int:
        h = self.dt
        if stiff:
            norm = scipy.linalg.norm(M, 2)
            if norm > 0:
                h = min(h, 1.0 / (4.0 * norm))
        steps = max(1, math.ceil(length / h - 1e-9))
        if even and steps % 2:
            steps += 1
        return steps

    def march(
        self, Y0: np.ndarray, s: float, t: float, stiff: bool = False, even: bool = False
    ) -> Iterator[Stretch]:
        """
        Propagates Y0 from s to t, one graph piece at a time.

        :param Y0: Initial value, (nN,) or (nN, k).
        :param s: Start time.
        :param t: End time.
        :param stiff: Shrink the step to 1/(4 |M|) on pieces with a large closed-loop matrix.
        :param even: Use an even number of steps per piece.
        :raises DivergenceError: If the value stops being finite.
        """
        if t < s:
            raise PreconditionError(f"Cannot propagate backwards from {s} to {t}")
        Y = np.array(Y0, dtype=float)
        if t == s:
            return
        for start, end, constant in self.graph.intervals(s, t):
            anchor = 0.5 * (start + end)
            if constant:
                L = self.laplacian(anchor)
                M = self.matrix(L)
                steps = self._steps(end - start, M, stiff, even)
                h = (end - start) / steps
                E = step_exponential(M, h)
                values = np.empty((steps + 1,) + Y.shape)
                values[0] = Y
                for i in range(steps):
                    Y = E @ Y
                    values[i + 1] = Y
                laplacian = lambda _t, L=L: L
            else:
                M_of = lambda tau, anchor=anchor: self.matrix(self.laplacian(tau, anchor))
                steps = self._steps(end - start, M_of(anchor), stiff, even)
                h = (end - start) / steps
                values = np.empty((steps + 1,) + Y.shape)
                values[0] = Y
                tau = start
                for i in range(steps):
                    k1 = M_of(tau) @ Y
                    M_mid = M_of(tau + h / 2)
                    k2 = M_mid @ (Y + h / 2 * k1)
                    k3 = M_mid @ (Y + h / 2 * k2)
                    k4 = M_of(tau + h) @ (Y + h * k3)
                    Y = Y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
                    tau = start + (i + 1) * h
                    values[i + 1] = Y
                laplacian = lambda _t, anchor=anchor: self.laplacian(_t, anchor)

            if not np.all(np.isfinite(values)):
                bad = int(np.argmin(np.all(np.isfinite(values.reshape(steps + 1, -1)), axis=1)))
                last = start + (bad - 1) * h
                raise DivergenceError("Propagated state stopped being finite", last_finite_time=last)
            times = start + h * np.arange(steps + 1)
            times[-1] = end
            yield Stretch(start, end, constant, times, values, laplacian)

    def propagate(self, Y0: np.ndarray, s: float, t: float) -> np.ndarray:
        """
        Value at t of the solution starting from Y0 at s.
        """
        Y = np.array(Y0, dtype=float)
        for stretch in self.march(Y, s, t):
            Y = stretch.values[-1]
        return Y


def state_transition(p: Plant, K: np.ndarray, g: GraphSignal, s: float, t: float, dt: float = constants.DT) -> np.ndarray:
    """
    Transition matrix Phi(t, s) of the consensus error dynamics
    e' = (I (x) A - Lhat(t) (x) BK) e.

    :raises PreconditionError: If t < s or s < 0.
    :raises DivergenceError: If the transition matrix stops being finite.
    """
    if s < 0 or t < s:
        raise PreconditionError(f"Transition matrix needs t >= s >= 0, got s={s}, t={t}")
    propagator = Propagator(p, K, g, dt, augmented=True)
    return propagator.propagate(np.eye(p.n * g.n_nodes), s, t)
