"""
Per-edge weight schedules built from contiguous closed-form segments.
"""
from __future__ import annotations

import bisect
import functools
import logging
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, List, Optional, Tuple

from syncindex.exceptions import OutOfDomainError, PreconditionError
from syncindex.graph.profile import Constant, WeightProfile

logger = logging.getLogger(__name__)

# Relative slack used when comparing segment boundaries and value bounds.
_EPS = 1e-9


def _close(a: float, b: float) -> bool:
    return abs(a - b) <= _EPS * max(1.0, abs(a), abs(b))


@functools.total_ordering
@dataclass(frozen=True, eq=True)
class WeightSegment:
    """
    A closed-form weight on [t_start, t_end).
    The final segment of a non-periodic schedule may use t_end = math.inf.
    """
    t_start: float
    t_end: float
    profile: WeightProfile

    def __post_init__(self):
        if not math.isfinite(self.t_start):
            raise PreconditionError(f"Segment start must be finite, got {self.t_start}")
        if not self.t_start < self.t_end:
            raise PreconditionError(f"Segment start {self.t_start} must be less than its end {self.t_end}")

    def __str__(self) -> str:
        return f"[{self.t_start}, {self.t_end}): {self.profile!r}"

    def __lt__(self, other: "WeightSegment") -> bool:
        return self.t_start < other.t_start

    def __contains__(self, t: float) -> bool:
        return self.t_start <= t < self.t_end

    @property
    def length(self) -> float:
        return self.t_end - self.t_start

    def value(self, t: float) -> float:
        return self.profile.value(t, self.t_start)

    def integral(self, a: float, b: float) -> float:
        return self.profile.integral(a, b, self.t_start)

    def value_range(self) -> Tuple[float, float]:
        return self.profile.value_range(self.t_start, self.t_end, self.t_start)

    def shifted(self, eps: float) -> "WeightSegment":
        return WeightSegment(self.t_start, self.t_end, self.profile.shifted(eps))

    def to_dict(self) -> dict:
        return {
            "t0": self.t_start,
            "t1": None if math.isinf(self.t_end) else self.t_end,
            "profile": self.profile.to_dict(),
        }


@dataclass(frozen=True)
class Piece:
    """
    A maximal sub-interval [start, end) of a schedule on which a single segment is
    active. ``shift`` maps schedule time to segment time (multiples of the period).
    """
    start: float
    end: float
    segment: WeightSegment
    shift: float = 0.0

    def value(self, t: float) -> float:
        return self.segment.value(t - self.shift)

    def integral(self) -> float:
        return self.segment.integral(self.start - self.shift, self.end - self.shift)


class WeightSchedule:
    """
    The weight w_ij(t) of a single edge, as contiguous segments starting at t = 0.

    When ``period`` is given, the segments describe one period [0, period) which
    repeats forever and profiles are evaluated on the folded time t mod period.
    """

    def __init__(self, segments: Iterable[WeightSegment], w_star: float, period: Optional[float] = None):
        self.segments: Tuple[WeightSegment, ...] = tuple(segments)
        self.w_star = float(w_star)
        self.period = None if period is None else float(period)
        self._starts = [segment.t_start for segment in self.segments]
        self._validate()

    def __repr__(self) -> str:
        period = f", period={self.period}" if self.period is not None else ""
        return f"<WeightSchedule {len(self.segments)} segments, w_star={self.w_star}{period}>"

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, WeightSchedule)
            and self.segments == other.segments
            and self.w_star == other.w_star
            and self.period == other.period
        )

    def __hash__(self):
        return hash((self.segments, self.w_star, self.period))

    def _validate(self):
        if not self.segments:
            raise PreconditionError("A weight schedule needs at least one segment.")
        if self.w_star < 0:
            raise PreconditionError(f"w_star must be nonnegative, got {self.w_star}")
        if self.segments[0].t_start != 0:
            raise PreconditionError(f"First segment must start at t=0, got t={self.segments[0].t_start}")
        for prev, segment in zip(self.segments, self.segments[1:]):
            if not _close(prev.t_end, segment.t_start):
                raise PreconditionError(
                    f"Segments are not contiguous at t={prev.t_end}: next segment starts at t={segment.t_start}"
                )
        if self.period is not None:
            if self.period <= 0:
                raise PreconditionError(f"Period must be positive, got {self.period}")
            if not _close(self.segments[-1].t_end, self.period):
                raise PreconditionError(
                    f"Periodic schedule must end at its period {self.period}, got t={self.segments[-1].t_end}"
                )
        slack = _EPS * max(1.0, self.w_star)
        for segment in self.segments:
            low, high = segment.value_range()
            if low < -slack or high > self.w_star + slack:
                raise PreconditionError(
                    f"Segment {segment} leaves [0, w_star={self.w_star}] (range {low}..{high})"
                )

    @property
    def end(self) -> float:
        """
        End of the declared span (exclusive). Infinite for periodic schedules.
        """
        if self.period is not None:
            return math.inf
        return self.segments[-1].t_end

    @property
    def is_piecewise_constant(self) -> bool:
        return all(segment.profile.is_constant for segment in self.segments)

    @property
    def is_constant(self) -> bool:
        """
        Whether the weight never changes (single constant segment, or equal constants).
        """
        return self.is_piecewise_constant and len({segment.profile.value(0.0) for segment in self.segments}) == 1

    def _check_domain(self, t0: float, t1: float):
        if t0 < 0:
            raise OutOfDomainError(f"Time {t0} is before the schedule starts at t=0.")
        end = self.end
        if t1 > end and not _close(t1, end):
            raise OutOfDomainError(f"Time {t1} is beyond the schedule span [0, {end}).")

    def segment_at(self, t: float) -> Tuple[WeightSegment, float]:
        """
        Obtains the segment active at time t (right-continuous) and the shift
        mapping schedule time onto it.

        :raises OutOfDomainError: If t is outside the schedule span.
        """
        if t < 0 or t >= self.end:
            raise OutOfDomainError(f"Time {t} is outside the schedule span [0, {self.end}).")
        shift = 0.0
        local = t
        if self.period is not None:
            k = math.floor(t / self.period)
            shift = k * self.period
            local = t - shift
            # Snap onto a period boundary lost to rounding.
            if local >= self.period or _close(local, self.period):
                shift += self.period
                local = max(0.0, t - shift)
        index = bisect.bisect_right(self._starts, local + _EPS * max(1.0, abs(local))) - 1
        return self.segments[max(index, 0)], shift

    def weight_at(self, t: float) -> float:
        """
        Evaluates w(t).

        :raises OutOfDomainError: If t is outside the schedule span.
        """
        segment, shift = self.segment_at(t)
        return segment.value(t - shift)

    def pieces(self, t0: float, t1: float) -> Iterator[Piece]:
        """
        Iterates the pieces of the schedule overlapping [t0, t1) in order.

        :raises OutOfDomainError: If the window exceeds the schedule span.
        """
        self._check_domain(t0, t1)
        if self.period is None:
            for segment in self.segments:
                start = max(t0, segment.t_start)
                end = min(t1, segment.t_end)
                if end - start > _EPS * max(1.0, abs(start)):
                    yield Piece(start, end, segment)
            return

        k = math.floor(t0 / self.period)
        while k * self.period < t1:
            shift = k * self.period
            for segment in self.segments:
                start = max(t0, segment.t_start + shift)
                end = min(t1, segment.t_end + shift)
                if end - start > _EPS * max(1.0, abs(start)):
                    yield Piece(start, end, segment, shift)
            k += 1

    def breakpoints(self, t0: float, t1: float) -> List[float]:
        """
        Times in (t0, t1) where the active segment changes.
        """
        return [piece.start for piece in self.pieces(t0, t1)][1:]

    def integral(self, t0: float, t1: float) -> float:
        """
        Exact integral of the weight over [t0, t1].
        """
        return math.fsum(piece.integral() for piece in self.pieces(t0, t1))

    def shifted(self, eps: float) -> "WeightSchedule":
        """
        Returns the schedule with every value raised by eps (w_star raised too).
        """
        return WeightSchedule(
            (segment.shifted(eps) for segment in self.segments),
            self.w_star + max(eps, 0.0),
            self.period,
        )

    def to_dict(self) -> dict:
        data = {"w_star": self.w_star, "segments": [segment.to_dict() for segment in self.segments]}
        if self.period is not None:
            data["period"] = self.period
        return data

    @classmethod
    def constant(cls, value: float, w_star: float = None) -> "WeightSchedule":
        """
        A weight that never changes.
        """
        return cls([WeightSegment(0.0, math.inf, Constant(value))], value if w_star is None else w_star)


def weight_at(schedule: WeightSchedule, t: float) -> float:
    """
    Evaluates a schedule at time t (right-continuous at segment boundaries).

    :raises OutOfDomainError: If t is outside the schedule span.
    """
    return schedule.weight_at(t)
