"""
Waterline profile and draft depth
=================================

A water mask gives one waterline row per column. The distance from each
scale to that line turns the corrected ladder into a depth in meters.
"""

import numpy as np

from draftread import (
    DraftScale, ScaleLadder, SegmentationMask, TemporalWindow, distance_to_waterline,
    estimate_depth, extract_profile,
)

# 300x400 mask, water from row 340 down, with a small wave on the left
rows = np.full(300, 340)
rows[:60] += np.arange(60) % 5
cells = np.arange(400)[:, None] >= rows[None, :]
profile = extract_profile(SegmentationMask(cells))
print("waterline rows, first 8 columns:", profile.rows[:8].tolist())

# Two corrected scales, 7.8 m and 8.0 m, 80 px apart, 40 px tall glyphs
ladder = ScaleLadder((DraftScale(150, 220, 40, 80, True), DraftScale(150, 300, 40, 78, True)))
for s in ladder:
    print(f"scale {s.value_m:.1f} m sits {distance_to_waterline(s, profile):.0f} px above the water")

reading = estimate_depth(ladder, profile)
print(f"{reading.method.value}: {reading.depth_m:.3f} m")

# With only one scale visible the glyph height is the ruler
single = estimate_depth(ScaleLadder((ladder[1],)), profile)
print(f"{single.method.value}: {single.depth_m:.3f} m")

# Frame-to-frame readings are smoothed over a one second window.
# The water bobs by a few rows between frames.
window = TemporalWindow.for_frame_rate(30)
for bob in (0, 3, -2, 1):
    frame = extract_profile(SegmentationMask(np.arange(400)[:, None] >= (rows + bob)[None, :]))
    avg = window.push(estimate_depth(ladder, frame))
print(f"windowed average over {len(window.readings)} frames: {avg:.3f} m")
