"""
Integration of the coupled agent dynamics.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from syncindex import constants
from syncindex.exceptions import PreconditionError
from syncindex.graph import GraphSignal
from syncindex.lti import Plant
from syncindex.sim.dynamics import decay_rates, error_projection, lyapunov_value
from syncindex.sim.transition import Propagator, Stretch

logger = logging.getLogger(__name__)


@dataclass
class Trajectory:
    """
    Sampled solution of the coupled system.

    ``alpha`` is NaN at samples whose consensus error is below the zero-error guard.
    ``alpha_left`` holds the left limits of alpha, which differ from ``alpha`` only at
    graph switches.
    """
    times: np.ndarray
    states: np.ndarray
    errors: np.ndarray
    V: np.ndarray
    alpha: np.ndarray
    n: int
    N: int
    P: np.ndarray = field(repr=False)
    alpha_left: Optional[np.ndarray] = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.times)

    def __repr__(self) -> str:
        return f"<Trajectory N={self.N}, n={self.n}, t=[{self.times[0]}, {self.times[-1]}], {len(self)} samples>"

    @property
    def span(self) -> float:
        return float(self.times[-1] - self.times[0])

    @property
    def log_V(self) -> np.ndarray:
        """
        ln V, NaN where V is numerically zero.
        """
        log_V = np.full_like(self.V, np.nan)
        positive = self.V > constants.LOG_V_FLOOR
        log_V[positive] = np.log(self.V[positive])
        return log_V

    def cumulative_decay(self) -> np.ndarray:
        """
        Trapezoidal integral of alpha from the first sample to every sample. Each step
        uses the left limit of alpha at its right end, so switches add no error.
        """
        right = self.alpha if self.alpha_left is None else self.alpha_left
        steps = 0.5 * np.diff(self.times) * (self.alpha[:-1] + right[1:])
        return np.concatenate([[0.0], np.cumsum(steps)])

    def agent_states(self, i: int) -> np.ndarray:
        """
        (S, n) state history of agent i.
        """
        return self.states[:, i * self.n:(i + 1) * self.n]

    def decimated(self, every: int) -> "Trajectory":
        """
        Keeps every ``every``-th sample and the final one. Left limits are dropped
        since the coarse steps no longer end at the switches.
        """
        if every <= 1:
            return self
        index = np.arange(0, len(self), every)
        if index[-1] != len(self) - 1:
            index = np.append(index, len(self) - 1)
        return Trajectory(
            self.times[index], self.states[index], self.errors[index], self.V[index], self.alpha[index],
            self.n, self.N, self.P,
        )


def _concatenate(stretches: List[Stretch]) -> np.ndarray:
    # Interior piece ends appear twice; keep the copy starting the next piece.
    parts = [stretch.values[:-1] for stretch in stretches]
    parts.append(stretches[-1].values[-1:])
    return np.concatenate(parts)


def _min_dwell(g: GraphSignal, t_end: float) -> float:
    points = [0.0] + g.breakpoints(0.0, t_end)
    if len(points) < 2:
        return np.inf
    return float(np.min(np.diff(points)))


def integrate(
    p: Plant,
    K: np.ndarray,
    g: GraphSignal,
    x0: np.ndarray,
    t_end: float,
    dt: float = None,
    P: np.ndarray = None,
    record_every: int = 1,
) -> Trajectory:
    """
    Integrates x_i' = A x_i + BK sum_j w_ij(t) (x_j - x_i) from x0 over [0, t_end].

    The consensus error is propagated with its own dynamics from e(0) = (J (x) I) x0
    and re-projected, so it stays accurate when the states themselves grow.

    :param p: Agent model.
    :param K: Feedback gain (m x n).
    :param g: Graph signal.
    :param x0: Stacked initial state (nN,).
    :param t_end: Final time.
    :param dt: Step size (defaults to SYNCINDEX_DT or 1e-3).
    :param P: Lyapunov matrix for V and alpha (identity when omitted).
    :param record_every: Keep every k-th sample.
    :raises PreconditionError: For invalid shapes, a non-positive horizon or a step
        larger than a quarter of the shortest dwell of a piecewise-constant graph.
    :raises DivergenceError: If the state stops being finite.
    """
    dt = constants.DT if dt is None else dt
    n, N = p.n, g.n_nodes
    x0 = np.asarray(x0, dtype=float).ravel()
    if x0.shape != (n * N,):
        raise PreconditionError(f"Initial state must have n*N = {n * N} entries, got {x0.size}")
    if not np.all(np.isfinite(x0)):
        raise PreconditionError("Initial state has non-finite entries")
    if t_end <= 0:
        raise PreconditionError(f"Final time must be positive, got {t_end}")
    if dt <= 0:
        raise PreconditionError(f"Step size must be positive, got {dt}")
    if g.is_piecewise_constant:
        dwell = _min_dwell(g, t_end)
        if dt > dwell / 4:
            raise PreconditionError(f"Step size {dt} exceeds a quarter of the shortest dwell time {dwell}")
    P = np.eye(n) if P is None else np.asarray(P, dtype=float)

    logger.debug(f"Integrating N={N}, n={n} over [0, {t_end}] with dt={dt}")
    state_stretches = list(Propagator(p, K, g, dt, augmented=False).march(x0, 0.0, t_end))
    error_propagator = Propagator(p, K, g, dt, augmented=True)
    error_stretches = list(error_propagator.march(error_projection(x0, n, N), 0.0, t_end))

    times = np.concatenate([stretch.times[:-1] for stretch in state_stretches] + [[t_end]])
    states = _concatenate(state_stretches)
    errors = error_projection(_concatenate(error_stretches), n, N)
    laplacians = np.concatenate(
        [stretch.laplacians()[:-1] for stretch in error_stretches] + [error_stretches[-1].laplacians()[-1:]]
    )
    # Laplacian in force just before every sample.
    left_laplacians = np.concatenate(
        [error_stretches[0].laplacians()[:1]] + [stretch.laplacians()[1:] for stretch in error_stretches]
    )

    V = lyapunov_value(errors, P)
    with np.errstate(divide="ignore", invalid="ignore"):
        alpha = decay_rates(errors, laplacians, p.A, error_propagator.BK, P)
        alpha_left = decay_rates(errors, left_laplacians, p.A, error_propagator.BK, P)
    guard = constants.ZERO_ERROR_GUARD * (1.0 + np.linalg.norm(states, axis=1))
    converged = np.linalg.norm(errors, axis=1) <= guard
    alpha[converged] = np.nan
    alpha_left[converged] = np.nan
    if converged.any():
        logger.debug(f"Consensus error below guard from t={times[np.argmax(converged)]}")

    trajectory = Trajectory(times, states, errors, V, alpha, n, N, P, alpha_left)
    return trajectory.decimated(record_every)
