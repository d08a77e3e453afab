"""Clock time vocabulary: 720-way classes, hand angles, cyclic distance.

Angles are degrees measured clockwise from the 12 o'clock mark. A time class
is ``60 * hour + minute`` on a 12-hour dial, so the class space is the cycle
``Z/720``.
"""

from __future__ import annotations

import math
import operator
from dataclasses import dataclass
from typing import NamedTuple

N_CLASSES = 720
N_HOURS = 12
N_MINUTES = 60


@dataclass(frozen=True, order=True)
class ClockTime:
    hour: int
    minute: int

    def __post_init__(self):
        for name in ("hour", "minute"):
            value = getattr(self, name)
            if isinstance(value, bool):
                raise TypeError(f"{name} must be an integer, got {value!r}")
            object.__setattr__(self, name, operator.index(value))
        if not 0 <= self.hour < N_HOURS:
            raise ValueError(f"hour must be in [0, 11], got {self.hour}")
        if not 0 <= self.minute < N_MINUTES:
            raise ValueError(f"minute must be in [0, 59], got {self.minute}")

    @property
    def index(self) -> int:
        return encode_time(self)

    @classmethod
    def from_index(cls, index: int) -> ClockTime:
        return decode_class(index)

    def __str__(self) -> str:
        return f"{self.hour}:{self.minute:02d}"


class HandAngles(NamedTuple):
    hour_angle: float
    minute_angle: float

    def swapped(self) -> HandAngles:
        return HandAngles(self.minute_angle, self.hour_angle)


def check_class(index) -> int:
    """Validate a time class index and return it as a Python int."""
    if isinstance(index, bool) or int(index) != index:
        raise TypeError(f"time class must be an integer, got {index!r}")
    index = int(index)
    if not 0 <= index < N_CLASSES:
        raise ValueError(f"time class must be in [0, 719], got {index}")
    return index


def encode_time(t: ClockTime) -> int:
    return t.hour * N_MINUTES + t.minute


def decode_class(index: int) -> ClockTime:
    index = check_class(index)
    return ClockTime(index // N_MINUTES, index % N_MINUTES)


def hand_angles(t: ClockTime) -> HandAngles:
    """Exact hand directions for ``t``; the hour hand drifts 0.5 deg per minute."""
    return HandAngles(30.0 * t.hour + 0.5 * t.minute, 6.0 * t.minute)


def round_half_up(x: float) -> int:
    # Python's round() is banker's rounding; the dial needs a symmetric rule.
    return math.floor(x + 0.5)


def decode_angles(hour_angle: float, minute_angle: float) -> int:
    """Nearest time class treating the arguments as (hour hand, minute hand)."""
    minute = round_half_up((minute_angle % 360.0) / 6.0) % N_MINUTES
    hour = round_half_up(((hour_angle % 360.0) - 0.5 * minute) / 30.0) % N_HOURS
    return hour * N_MINUTES + minute


def angles_to_time(a: HandAngles) -> list[int]:
    """Ranked candidate classes for a pair of measured hand directions.

    Rank 1 reads the angles as given. Rank 2 reads them with the hands
    swapped, which is the usual confusion when both hands look alike. The
    list is de-duplicated, so it has one element when both readings agree.
    """
    direct = decode_angles(a.hour_angle, a.minute_angle)
    swapped = decode_angles(a.minute_angle, a.hour_angle)
    return [direct] if swapped == direct else [direct, swapped]


def circular_distance(a: int, b: int) -> int:
    """Minutes between two classes on the 720-cycle, in [0, 360]."""
    d = abs(check_class(a) - check_class(b))
    return min(d, N_CLASSES - d)


def wrapped_difference(a: float, b: float, period: float = N_CLASSES) -> float:
    """Signed ``a - b`` reduced into ``(-period/2, period/2]``."""
    half = period / 2.0
    d = (a - b) % period
    return d - period if d > half else d


def angular_difference(a: float, b: float) -> float:
    """Absolute difference of two directions in degrees, in [0, 180]."""
    d = abs(a - b) % 360.0
    return min(d, 360.0 - d)
