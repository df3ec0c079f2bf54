"""
Empirical consensus verdicts from simulated trajectories: sliding-window integrals
of the decay rate, exponential rate fits and their classification.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
import scipy.stats

from syncindex import constants
from syncindex.exceptions import PreconditionError
from syncindex.sim import Trajectory
from syncindex.types import Classification

logger = logging.getLogger(__name__)


@dataclass
class RateFit:
    """
    Least-squares line ln V(t) = intercept + slope t. gamma_hat = -slope / 2 is the
    decay rate of the consensus error itself.
    """
    gamma_hat: float
    intercept: float
    r_squared: float
    t_start: float
    t_stop: float
    truncated: bool = False

    @property
    def slope(self) -> float:
        return -2.0 * self.gamma_hat

    def as_tuple(self) -> Tuple[float, float, float]:
        return self.gamma_hat, self.intercept, self.r_squared


@dataclass
class GuecVerdict:
    window_T: float
    window_starts: np.ndarray = field(repr=False)
    window_integrals: np.ndarray = field(repr=False)
    lower_bound_a: float
    alpha_upper: float
    rate_fit: Optional[RateFit] = None
    classification: Classification = Classification.inconclusive
    V_ratio: float = math.nan
    restart_rates: List[float] = field(default_factory=list)
    uniform: Optional[bool] = None

    @property
    def alpha_integrals(self) -> List[Tuple[float, float]]:
        return list(zip(self.window_starts.tolist(), self.window_integrals.tolist()))

    @property
    def exponential(self) -> bool:
        return self.classification == Classification.exponential


def window_alpha_integrals(traj: Trajectory, T: float) -> GuecVerdict:
    """
    Trapezoidal integrals of alpha over every window [t, t+T] starting on the sample grid.
    Windows reaching into samples where the error is numerically zero are skipped.

    :raises PreconditionError: If the trajectory spans less than 2T.
    """
    if T <= 0:
        raise PreconditionError(f"Window length must be positive, got {T}")
    if traj.span < 2 * T:
        raise PreconditionError(f"Trajectory spans {traj.span}, at least 2T = {2 * T} is needed")
    times = traj.times
    cumulative = traj.cumulative_decay()
    starts = times[times <= times[-1] - T + 1e-12]
    ends = np.minimum(starts + T, times[-1])
    integrals = np.interp(ends, times, cumulative) - cumulative[: len(starts)]
    valid = np.isfinite(integrals)
    if not valid.any():
        raise PreconditionError("No window avoids numerically converged samples")
    starts, integrals = starts[valid], integrals[valid]
    lower = float(integrals.min())
    upper = float(np.nanmax(traj.alpha))
    logger.debug(f"{len(starts)} windows of length {T}: min integral {lower:.6g}, max alpha {upper:.6g}")
    return GuecVerdict(window_T=T, window_starts=starts, window_integrals=integrals, lower_bound_a=lower, alpha_upper=upper)


def _fit_range(traj: Trajectory, t_start: float, t_stop: float) -> Tuple[np.ndarray, np.ndarray, bool]:
    mask = (traj.times >= t_start - 1e-12) & (traj.times <= t_stop + 1e-12)
    times = traj.times[mask]
    V = traj.V[mask]
    alpha = traj.alpha[mask]
    floor = max(constants.LOG_V_FLOOR, np.nanmax(traj.V) * constants.FIT_FLOOR_RATIO)
    bad = ~np.isfinite(V) | (V <= floor) | np.isnan(alpha)
    truncated = bool(bad.any())
    if truncated:
        stop = int(np.argmax(bad))
        times, V = times[:stop], V[:stop]
    return times, V, truncated


def fit_exponential_rate(traj: Trajectory, t_skip: float = None, t_stop: float = None) -> RateFit:
    """
    Fits a line through (t, ln V(t)) for t >= t_skip.

    The fit is truncated where V reaches numerical zero (relative to its peak) and
    the truncation is flagged.

    :param t_skip: Initial transient to skip (10 % of the span by default).
    :param t_stop: Optional end of the fitted range.
    :raises PreconditionError: If fewer than three usable samples remain.
    """
    t0 = traj.times[0]
    t_skip = t0 + constants.T_SKIP_FRACTION * traj.span if t_skip is None else t_skip
    t_stop = traj.times[-1] if t_stop is None else t_stop
    times, V, truncated = _fit_range(traj, t_skip, t_stop)
    if len(times) < 3:
        raise PreconditionError(f"Too few positive samples of V on [{t_skip}, {t_stop}] to fit a rate")
    if truncated:
        logger.warning(f"Rate fit truncated at t={times[-1]} where V became numerically zero")
    result = scipy.stats.linregress(times, np.log(V))
    r_squared = float(result.rvalue ** 2) if np.isfinite(result.rvalue) else 1.0
    return RateFit(
        gamma_hat=float(-result.slope / 2.0),
        intercept=float(result.intercept),
        r_squared=r_squared,
        t_start=float(times[0]),
        t_stop=float(times[-1]),
        truncated=truncated,
    )


def restart_rates(traj: Trajectory, t_skip: float, restarts: int = constants.UNIFORMITY_RESTARTS) -> List[float]:
    """
    Rates fitted on equally long ranges starting at evenly spaced restart times.
    Ranges without enough usable samples are left out.
    """
    width = (traj.times[-1] - t_skip) / 2.0
    rates = []
    for s in np.linspace(t_skip, traj.times[-1] - width, restarts):
        try:
            rates.append(fit_exponential_rate(traj, s, s + width).gamma_hat)
        except PreconditionError:
            logger.debug(f"No usable samples for the restart at s={s}")
    return rates


def is_uniform(rates: List[float], rtol: float = constants.UNIFORMITY_RTOL) -> Optional[bool]:
    """
    Whether every restart rate lies within rtol of their median. None with fewer than two.
    """
    if len(rates) < 2:
        return None
    median = float(np.median(rates))
    if median == 0:
        return all(rate == 0 for rate in rates)
    return all(abs(rate - median) <= rtol * abs(median) for rate in rates)


def classify(
    verdict: GuecVerdict,
    fit: RateFit,
    V_ratio: float,
    a_min: float = constants.A_MIN,
    r2_threshold: float = constants.R2_THRESHOLD,
    decay_ratio: float = constants.DECAY_RATIO,
) -> Classification:
    """
    exponential: r^2 >= r2_threshold, lower_bound_a >= a_min and a positive rate.
    divergent: V grew by at least decay_ratio.
    asymptotic_only: V shrank by at least decay_ratio without passing the exponential test.
    inconclusive: anything else.
    """
    if fit.r_squared >= r2_threshold and verdict.lower_bound_a >= a_min and fit.gamma_hat > 0:
        return Classification.exponential
    if V_ratio >= decay_ratio:
        return Classification.divergent
    if V_ratio <= 1.0 / decay_ratio:
        return Classification.asymptotic_only
    return Classification.inconclusive


def guec_verdict(
    traj: Trajectory,
    T: float,
    t_skip: float = None,
    a_min: float = constants.A_MIN,
    r2_threshold: float = constants.R2_THRESHOLD,
    decay_ratio: float = constants.DECAY_RATIO,
    restarts: int = constants.UNIFORMITY_RESTARTS,
) -> GuecVerdict:
    """
    Window integrals, rate fit, classification and restart uniformity of a trajectory.
    """
    verdict = window_alpha_integrals(traj, T)
    t_skip = traj.times[0] + constants.T_SKIP_FRACTION * traj.span if t_skip is None else t_skip
    verdict.rate_fit = fit_exponential_rate(traj, t_skip)

    valid = np.isfinite(traj.V)
    V_first, V_last = traj.V[valid][0], traj.V[valid][-1]
    if V_first > 0:
        verdict.V_ratio = float(V_last / V_first)
    verdict.classification = classify(verdict, verdict.rate_fit, verdict.V_ratio, a_min, r2_threshold, decay_ratio)
    verdict.restart_rates = restart_rates(traj, t_skip, restarts)
    verdict.uniform = is_uniform(verdict.restart_rates)
    logger.info(
        f"Classification {verdict.classification.name}: gamma_hat={verdict.rate_fit.gamma_hat:.6g}, "
        f"r^2={verdict.rate_fit.r_squared:.4f}, a={verdict.lower_bound_a:.6g}"
    )
    return verdict


@dataclass
class DecayConsistency:
    """
    Both directions of the window-integral test checked against a rate fit.

    sufficiency: a > 0 implies gamma_hat >= (1 - rtol) a / (2T).
    necessity: an exponential bound V(t) <= gamma3 exp(-gamma4 (t - s)) V(s) implies
    every window integral >= -ln gamma3 + gamma4 T (within rtol).
    """
    gamma3: float
    gamma4: float
    sufficiency_bound: float
    sufficiency_ok: bool
    necessity_bound: float
    necessity_ok: bool

    @property
    def ok(self) -> bool:
        return self.sufficiency_ok and self.necessity_ok


def decay_constants(traj: Trajectory, verdict: GuecVerdict) -> Tuple[float, float]:
    """
    gamma4 = 2 gamma_hat and the smallest gamma3 with
    V(t) <= gamma3 exp(-gamma4 (t - s)) V(s) for every sampled s <= t.
    """
    gamma4 = 2.0 * verdict.rate_fit.gamma_hat
    log_V = traj.log_V
    valid = np.isfinite(log_V) & (traj.times <= verdict.rate_fit.t_stop)
    g = log_V[valid] + gamma4 * traj.times[valid]
    excess = g - np.minimum.accumulate(g)
    return float(np.exp(excess.max())), gamma4


def decay_consistency(
    traj: Trajectory, verdict: GuecVerdict, rtol: float = constants.DECAY_CONSISTENCY_RTOL
) -> DecayConsistency:
    """
    Checks both directions of the window-integral test on a classified trajectory.
    """
    gamma3, gamma4 = decay_constants(traj, verdict)
    a, T = verdict.lower_bound_a, verdict.window_T
    sufficiency_bound = a / (2.0 * T)
    sufficiency_ok = a <= 0 or verdict.rate_fit.gamma_hat >= (1.0 - rtol) * sufficiency_bound
    # Only windows inside the fitted range, where V is still resolved.
    inside = verdict.window_starts + T <= verdict.rate_fit.t_stop + 1e-12
    a_fit = float(verdict.window_integrals[inside].min()) if inside.any() else a
    necessity_bound = -math.log(gamma3) + gamma4 * T
    necessity_ok = a_fit >= necessity_bound - rtol * abs(necessity_bound)
    return DecayConsistency(gamma3, gamma4, sufficiency_bound, sufficiency_ok, necessity_bound, necessity_ok)
