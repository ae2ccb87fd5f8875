"""Waterline profile extraction and scale-to-water distances."""

from __future__ import annotations

import math

import numpy as np

from .core import ABSENT, DraftScale, SegmentationMask, WaterlineProfile


class WaterlineNotVisible(LookupError):
    """No water pixel lies under the horizontal extent of a scale."""


def extract_profile(mask: SegmentationMask) -> WaterlineProfile:
    """Topmost water row for every mask column (absent if the column is dry)."""
    cells = mask.cells
    rows = np.argmax(cells, axis=0).astype(np.int64)
    rows[~cells.any(axis=0)] = ABSENT
    return WaterlineProfile(rows, mask.height)


def scale_extent(scale: DraftScale, width: int) -> tuple[int, int]:
    """Inclusive column range ``[x_c - h, x_c + h]`` clipped to the image.

    The glyph width is not tracked on a scale, so the character height
    stands in for it. An empty range comes back as ``lo > hi``.
    """
    lo = max(0, math.ceil(scale.x_c - scale.char_height))
    hi = min(width - 1, math.floor(scale.x_c + scale.char_height))
    return lo, hi


def waterline_row_at(scale: DraftScale, profile: WaterlineProfile) -> float:
    """Median waterline row under the scale's horizontal extent."""
    lo, hi = scale_extent(scale, profile.width)
    rows = profile.rows[lo:hi + 1] if lo <= hi else profile.rows[:0]
    rows = rows[rows != ABSENT]
    if rows.size == 0:
        raise WaterlineNotVisible(
            f"no water under columns [{lo}, {hi}] for scale at x={scale.x_c:g}"
        )
    return float(np.median(rows))


def distance_to_waterline(scale: DraftScale, profile: WaterlineProfile) -> float:
    """Pixels from the scale center down to the waterline (positive = water below)."""
    return waterline_row_at(scale, profile) - scale.y_c
