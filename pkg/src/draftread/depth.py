"""Adaptive draft depth estimation and one-second temporal averaging."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

from .core import DepthReading, Method, ScaleLadder, ValidationError
from .scales import DEFAULT_RULES, SpatialRules
from .waterline import WaterlineNotVisible, distance_to_waterline

DEFAULT_FRAME_RATE = 30.0


def estimate_depth(
    ladder: ScaleLadder,
    profile,
    rules: SpatialRules = DEFAULT_RULES,
    *,
    ratio_only: bool = False,
) -> DepthReading:
    """Read the draft at the waterline from a corrected ladder.

    A scale is usable when its center is at or above the waterline measured
    under it. ``S1`` is the usable scale closest to the water. With two or
    more usable scales the depth is interpolated along the ladder between
    ``S1`` and its neighbor above, ``S1 + (d / d1) * (S1 - S2)``. With a
    single usable scale the glyph height sets the pixel scale,
    ``S3 - beta * d / h``.

    ``ratio_only`` swaps in the ratio-only two-scale form
    ``(d / d1) * |S1 - S2|``, which lacks the ``S1`` anchor. It exists only
    for comparison runs.
    """
    if not ladder.is_corrected():
        raise ValidationError(f"ladder is not in corrected order: {ladder.values}")
    usable = []
    for idx, scale in enumerate(ladder):
        try:
            d = distance_to_waterline(scale, profile)
        except WaterlineNotVisible:
            continue
        if d >= 0:
            usable.append((d, -idx))
    if not usable:
        return DepthReading.failed("depth")

    d, neg_idx = min(usable)
    idx = -neg_idx
    s1 = ladder[idx]
    waterline = s1.y_c + d

    if len(usable) >= 2:
        s2 = ladder[idx - 1] if idx > 0 else ladder[idx + 1]
        if ratio_only:
            depth = d / abs(s2.y_c - s1.y_c) * abs(s1.value_m - s2.value_m)
        else:
            slope = (s2.value_m - s1.value_m) / (s2.y_c - s1.y_c)
            depth = s1.value_m + d * slope
        return DepthReading(max(0.0, depth), Method.TWO_SCALE, (s1, s2), waterline)

    depth = s1.value_m - rules.char_height_m * d / s1.char_height
    return DepthReading(max(0.0, depth), Method.SINGLE_SCALE, (s1,), waterline)


@dataclass
class TemporalWindow:
    """Bounded FIFO of successful readings covering one second of video.

    One window belongs to one camera stream and has a single writer.
    """

    capacity: int
    readings: deque = field(default_factory=deque)

    def __post_init__(self) -> None:
        if self.capacity < 1:
            raise ValidationError(f"window capacity must be >= 1, got {self.capacity}")
        self.readings = deque(self.readings, maxlen=self.capacity)

    @classmethod
    def for_frame_rate(cls, frame_rate: float = DEFAULT_FRAME_RATE,
                       seconds: float = 1.0) -> TemporalWindow:
        return cls(max(1, round(frame_rate * seconds)))

    def push(self, reading: DepthReading) -> float | None:
        if reading.ok:
            self.readings.append(reading)
        return self.mean()

    def mean(self) -> float | None:
        if not self.readings:
            return None
        return math.fsum(r.depth_m for r in self.readings) / len(self.readings)


def push_and_average(window: TemporalWindow, reading: DepthReading) -> float | None:
    return window.push(reading)
