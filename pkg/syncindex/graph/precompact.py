"""
Sufficient conditions for precompactness of the shifted Laplacian family.

Only sufficient conditions are checked: an invalid report means "not certified",
not "provably not precompact".
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

from syncindex import constants
from syncindex.exceptions import PreconditionError
from syncindex.graph.schedule import Piece, WeightSchedule, _close
from syncindex.graph.signal import Edge, GraphSignal
from syncindex.types import Certificate

logger = logging.getLogger(__name__)


@dataclass
class PrecompactnessReport:
    valid: bool
    min_dwell: float
    max_segment_lipschitz: float
    max_jump_ratio: float
    violations: List[Tuple[float, str]] = field(default_factory=list)
    certificates: Dict[Edge, Certificate] = field(default_factory=dict)
    periodic: bool = False
    c: float = 0.0
    c_hat: float = 0.0
    dwell_floor: float = 0.0
    horizon: float = 0.0

    def __str__(self) -> str:
        lines = [
            f"precompact (certified): {self.valid}",
            f"periodic: {self.periodic}",
            f"min dwell: {self.min_dwell} (floor = {self.dwell_floor})",
            f"max segment slope: {self.max_segment_lipschitz} (c = {self.c})",
            f"max jump ratio: {self.max_jump_ratio} (c_hat = {self.c_hat})",
        ]
        for edge, certificate in self.certificates.items():
            lines.append(f"  edge {edge}: {certificate.name}")
        for t, description in self.violations:
            lines.append(f"  violation at t={t}: {description}")
        return "\n".join(lines)


@dataclass
class _Run:
    """Maximal stretch of pieces sharing one constant value (or a single varying piece)."""
    start: float
    end: float
    first: Piece
    last: Piece


def _runs(schedule: WeightSchedule, horizon: float) -> List[_Run]:
    runs: List[_Run] = []
    for piece in schedule.pieces(0.0, horizon):
        if runs:
            prev = runs[-1]
            if (
                piece.segment.profile.is_constant
                and prev.last.segment.profile.is_constant
                and piece.value(piece.start) == prev.last.value(prev.last.start)
            ):
                runs[-1] = _Run(prev.start, piece.end, prev.first, piece)
                continue
        runs.append(_Run(piece.start, piece.end, piece, piece))
    return runs


@dataclass
class _EdgeStats:
    slope: float = 0.0
    jump_ratio: float = 0.0
    dwell: float = math.inf
    jumps: int = 0
    violations: List[Tuple[float, str]] = field(default_factory=list)
    jump_violations: List[Tuple[float, str]] = field(default_factory=list)


def _edge_stats(edge: Edge, schedule: WeightSchedule, horizon: float, c: float, c_hat: float) -> _EdgeStats:
    stats = _EdgeStats()
    runs = _runs(schedule, horizon)
    for piece in schedule.pieces(0.0, horizon):
        slope = piece.segment.profile.lipschitz
        stats.slope = max(stats.slope, slope)
        if slope > c:
            stats.violations.append((piece.start, f"edge {edge}: slope {slope} exceeds c={c}"))
    # The run cut off by the horizon has no dwell of its own.
    for prev, run in zip(runs, runs[1:]):
        left = prev.last.value(prev.end)
        right = run.first.value(run.start)
        jump = abs(right - left)
        if _close(left, right):
            continue
        stats.jumps += 1
        dwell = prev.end - prev.start
        stats.dwell = min(stats.dwell, dwell)
        ratio = jump / dwell
        stats.jump_ratio = max(stats.jump_ratio, ratio)
        if ratio > c_hat:
            stats.jump_violations.append(
                (run.start, f"edge {edge}: jump {jump} after {dwell} s gives ratio {ratio} exceeding c_hat={c_hat}")
            )
    return stats


def validate_precompactness(
    g: GraphSignal, horizon: float, c: float = None, c_hat: float = None, min_dwell: float = None
) -> PrecompactnessReport:
    """
    Certifies the shifted Laplacian family as precompact on [0, horizon].

    Periodic graphs are certified exactly. A piecewise-constant edge is certified by
    its dwell time alone when no interval between jumps is shorter than min_dwell.
    Every other edge must have bounded slopes on its continuous pieces (constant c)
    and every jump must be bounded by c_hat times the length of the interval
    preceding it.

    :param g: Graph to validate.
    :param horizon: Span to validate on.
    :param c: Slope bound (defaults to 10 * w_star).
    :param c_hat: Jump ratio bound (defaults to 10 * w_star).
    :param min_dwell: Shortest dwell accepted as positive (defaults to constants.MIN_DWELL).
    :raises PreconditionError: If horizon or min_dwell is not positive.
    """
    if horizon <= 0:
        raise PreconditionError(f"Horizon must be positive, got {horizon}")
    min_dwell = constants.MIN_DWELL if min_dwell is None else min_dwell
    if min_dwell <= 0:
        raise PreconditionError(f"Dwell floor must be positive, got {min_dwell}")
    c = constants.LIMIT_FACTOR * g.w_star if c is None else c
    c_hat = constants.LIMIT_FACTOR * g.w_star if c_hat is None else c_hat
    periodic = g.period is not None
    report = PrecompactnessReport(
        valid=True,
        min_dwell=math.inf,
        max_segment_lipschitz=0.0,
        max_jump_ratio=0.0,
        periodic=periodic,
        c=c,
        c_hat=c_hat,
        dwell_floor=min_dwell,
        horizon=horizon,
    )

    for edge, schedule in g.schedules.items():
        span = min(horizon, schedule.end)
        stats = _edge_stats(edge, schedule, span, c, c_hat)
        if span < horizon:
            stats.violations.append((span, f"edge {edge}: schedule ends before the horizon"))
        report.max_segment_lipschitz = max(report.max_segment_lipschitz, stats.slope)
        report.max_jump_ratio = max(report.max_jump_ratio, stats.jump_ratio)
        if schedule.is_piecewise_constant:
            report.min_dwell = min(report.min_dwell, stats.dwell)
        dwell_certified = schedule.is_piecewise_constant and stats.dwell >= min_dwell
        violations = stats.violations if dwell_certified else stats.violations + stats.jump_violations

        if periodic:
            certificate = Certificate.periodic
        elif violations:
            certificate = Certificate.none
        elif dwell_certified:
            certificate = Certificate.dwell
        elif stats.jumps:
            certificate = Certificate.lipschitz_jump
        else:
            certificate = Certificate.uniform_continuity
        report.certificates[edge] = certificate
        if not periodic:
            report.violations.extend(violations)

    report.violations.sort(key=lambda item: item[0])
    report.valid = all(certificate != Certificate.none for certificate in report.certificates.values())
    logger.debug(f"Precompactness on [0, {horizon}]: valid={report.valid}, {len(report.violations)} violations")
    return report
