"""
Numerical witness that an uncontrollable mode blocks consensus.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List

import numpy as np
import scipy.stats

from syncindex import constants
from syncindex.exceptions import NotApplicableError, PreconditionError
from syncindex.lti import ModeReport, Plant, uncontrollable_modes
from syncindex.sim import Trajectory

logger = logging.getLogger(__name__)

# Projections below this (relative to the largest state entry) count as zero.
_ZERO_TOL = 1e-9


def scaled_witness(v: np.ndarray) -> np.ndarray:
    """
    Rescales v so its first significant entry is 1.
    """
    first = np.flatnonzero(np.abs(v) > constants.RANK_TOL * np.abs(v).max())[0]
    v = v / v[first]
    return v.real if np.all(np.isreal(v)) else v


@dataclass
class WitnessReport:
    """
    Projections v^T x_i(t) of every agent onto an uncontrollable left eigenvector v.
    They evolve as exp(lambda t) v^T x_i(0) whatever the coupling, so agents starting
    with different projections never agree.
    """
    mode: ModeReport
    v: np.ndarray
    times: np.ndarray = field(repr=False)
    projections: np.ndarray = field(repr=False)
    growth_rates: List[float] = field(default_factory=list)
    r_squared: List[float] = field(default_factory=list)
    zero: List[bool] = field(default_factory=list)
    obstructed: bool = False

    @property
    def eigenvalue(self) -> complex:
        return self.mode.eigenvalue

    def predicted(self, t: float) -> np.ndarray:
        """
        exp(lambda t) v^T x_i(0) for every agent.
        """
        return np.exp(self.eigenvalue * (t - self.times[0])) * self.projections[0]

    def relative_error(self, t: float) -> np.ndarray:
        """
        Per-agent relative error of the simulated projection against the closed form
        at the sample nearest t (absolute error for agents with a zero projection).
        """
        index = int(np.argmin(np.abs(self.times - t)))
        predicted = self.predicted(self.times[index])
        scale = np.where(np.abs(predicted) > 0, np.abs(predicted), 1.0)
        return np.abs(self.projections[index] - predicted) / scale


def uncontrollable_witness_report(p: Plant, traj: Trajectory, tol: float = constants.RANK_TOL) -> WitnessReport:
    """
    Projects each agent's state onto the left eigenvector of the fastest-growing
    uncontrollable mode and fits a growth rate per agent.

    :raises NotApplicableError: If (A, B) has no uncontrollable mode.
    :raises PreconditionError: If the trajectory was not produced by agents of this plant.
    """
    modes = uncontrollable_modes(p, tol)
    if not modes:
        raise NotApplicableError("Plant has no uncontrollable mode to witness")
    if traj.n != p.n:
        raise PreconditionError(f"Trajectory agents have {traj.n} states, the plant has {p.n}")
    mode = max(modes, key=lambda m: (m.eigenvalue.real, m.eigenvalue.imag >= 0))
    v = scaled_witness(mode.left_eigenvector)
    if mode.degenerate:
        logger.warning(f"Witness mode {mode.eigenvalue} is defective; projections may drift polynomially")

    agents = traj.states.reshape(len(traj), traj.N, traj.n)
    projections = agents @ v.conj()
    scale = max(1.0, float(np.abs(traj.states).max()))
    report = WitnessReport(mode, v, traj.times, projections)
    for i in range(traj.N):
        magnitude = np.abs(projections[:, i])
        if magnitude.max() <= _ZERO_TOL * scale:
            report.zero.append(True)
            report.growth_rates.append(0.0)
            report.r_squared.append(1.0)
            continue
        report.zero.append(False)
        usable = magnitude > _ZERO_TOL * scale
        fit = scipy.stats.linregress(traj.times[usable], np.log(magnitude[usable]))
        report.growth_rates.append(float(fit.slope))
        report.r_squared.append(float(fit.rvalue ** 2) if np.isfinite(fit.rvalue) else 1.0)
    initial = projections[0]
    report.obstructed = bool(np.abs(initial[:, None] - initial[None, :]).max() > _ZERO_TOL * scale)
    logger.info(f"Witness mode lambda={mode.eigenvalue:.6g}: growth rates {report.growth_rates}, obstructed={report.obstructed}")
    return report
