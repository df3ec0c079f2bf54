"""
Closed-form edge weight profiles.

Every profile has an exact antiderivative, so union graph integrals are computed
without quadrature. Profiles are evaluated relative to an ``origin``, which is the
start time of the segment they belong to (only affine profiles use it).
"""
from __future__ import annotations

import abc
import math
from dataclasses import dataclass
from typing import Tuple

from syncindex.types import ProfileKind


class WeightProfile(metaclass=abc.ABCMeta):
    """
    Interface for a closed-form weight function of time.
    """

    @property
    @abc.abstractmethod
    def kind(self) -> ProfileKind:
        """
        The closed form of this profile.
        """

    @abc.abstractmethod
    def value(self, t: float, origin: float = 0.0) -> float:
        """
        Evaluates the profile.

        :param t: Time to evaluate at.
        :param origin: Start time of the owning segment.
        """

    @abc.abstractmethod
    def integral(self, a: float, b: float, origin: float = 0.0) -> float:
        """
        Exact integral of the profile over [a, b].
        """

    @property
    @abc.abstractmethod
    def lipschitz(self) -> float:
        """
        Smallest constant c with |w(t1) - w(t2)| <= c |t1 - t2|.
        """

    @abc.abstractmethod
    def value_range(self, a: float, b: float, origin: float = 0.0) -> Tuple[float, float]:
        """
        The (min, max) values taken on [a, b]. ``b`` may be infinite.
        """

    @abc.abstractmethod
    def shifted(self, eps: float) -> "WeightProfile":
        """
        Returns a copy of the profile raised by eps.
        """

    @abc.abstractmethod
    def to_dict(self) -> dict:
        """
        Scenario file representation.
        """

    @property
    def is_constant(self) -> bool:
        return self.lipschitz == 0.0

    @classmethod
    def from_dict(cls, data: dict) -> "WeightProfile":
        """
        Builds a profile from its scenario file representation.

        :raises KeyError: If a required field is missing.
        :raises ValueError: If the kind is unknown.
        """
        kind = data["kind"]
        if kind == ProfileKind.constant.name:
            return Constant(float(data["value"]))
        elif kind == ProfileKind.affine.name:
            return Affine(float(data["value_at_start"]), float(data["slope"]))
        elif kind == ProfileKind.sinusoid.name:
            return Sinusoid(
                float(data["offset"]),
                float(data["amplitude"]),
                float(data["angular_frequency"]),
                float(data.get("phase", 0.0)),
            )
        raise ValueError(f"Unknown profile kind: {kind}")


@dataclass(frozen=True)
class Constant(WeightProfile):
    value_: float

    def __repr__(self):
        return f"Constant({self.value_!r})"

    @property
    def kind(self) -> ProfileKind:
        return ProfileKind.constant

    def value(self, t: float, origin: float = 0.0) -> float:
        return self.value_

    def integral(self, a: float, b: float, origin: float = 0.0) -> float:
        return self.value_ * (b - a)

    @property
    def lipschitz(self) -> float:
        return 0.0

    def value_range(self, a: float, b: float, origin: float = 0.0) -> Tuple[float, float]:
        return self.value_, self.value_

    def shifted(self, eps: float) -> "Constant":
        return Constant(self.value_ + eps)

    def to_dict(self) -> dict:
        return {"kind": self.kind.name, "value": self.value_}


@dataclass(frozen=True)
class Affine(WeightProfile):
    value_at_start: float
    slope: float

    @property
    def kind(self) -> ProfileKind:
        return ProfileKind.affine

    def value(self, t: float, origin: float = 0.0) -> float:
        return self.value_at_start + self.slope * (t - origin)

    def integral(self, a: float, b: float, origin: float = 0.0) -> float:
        return self.value_at_start * (b - a) + 0.5 * self.slope * ((b - origin) ** 2 - (a - origin) ** 2)

    @property
    def lipschitz(self) -> float:
        return abs(self.slope)

    def value_range(self, a: float, b: float, origin: float = 0.0) -> Tuple[float, float]:
        start = self.value(a, origin)
        if math.isinf(b):
            if self.slope == 0:
                return start, start
            end = math.copysign(math.inf, self.slope)
        else:
            end = self.value(b, origin)
        return min(start, end), max(start, end)

    def shifted(self, eps: float) -> "Affine":
        return Affine(self.value_at_start + eps, self.slope)

    def to_dict(self) -> dict:
        return {"kind": self.kind.name, "value_at_start": self.value_at_start, "slope": self.slope}


@dataclass(frozen=True)
class Sinusoid(WeightProfile):
    """
    offset + amplitude * sin(angular_frequency * t + phase), in the time of the
    owning schedule (folded time for periodic schedules).
    """
    offset: float
    amplitude: float
    angular_frequency: float
    phase: float = 0.0

    @property
    def kind(self) -> ProfileKind:
        return ProfileKind.sinusoid

    def value(self, t: float, origin: float = 0.0) -> float:
        return self.offset + self.amplitude * math.sin(self.angular_frequency * t + self.phase)

    def integral(self, a: float, b: float, origin: float = 0.0) -> float:
        w = self.angular_frequency
        if w == 0:
            return self.value(a) * (b - a)
        return self.offset * (b - a) - self.amplitude / w * (math.cos(w * b + self.phase) - math.cos(w * a + self.phase))

    @property
    def lipschitz(self) -> float:
        return abs(self.amplitude * self.angular_frequency)

    def value_range(self, a: float, b: float, origin: float = 0.0) -> Tuple[float, float]:
        w = abs(self.angular_frequency)
        if w == 0 or self.amplitude == 0:
            v = self.value(a)
            return v, v
        if math.isinf(b) or (b - a) * w >= 2 * math.pi:
            return self.offset - abs(self.amplitude), self.offset + abs(self.amplitude)
        # Extremes sit at the end points or where the phase crosses pi/2 + k*pi.
        lo_phase, hi_phase = sorted((self.angular_frequency * a + self.phase, self.angular_frequency * b + self.phase))
        values = [self.value(a), self.value(b)]
        k = math.ceil((lo_phase - math.pi / 2) / math.pi)
        while math.pi / 2 + k * math.pi <= hi_phase:
            values.append(self.offset + self.amplitude * math.sin(math.pi / 2 + k * math.pi))
            k += 1
        return min(values), max(values)

    def shifted(self, eps: float) -> "Sinusoid":
        return Sinusoid(self.offset + eps, self.amplitude, self.angular_frequency, self.phase)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.name,
            "offset": self.offset,
            "amplitude": self.amplitude,
            "angular_frequency": self.angular_frequency,
            "phase": self.phase,
        }
