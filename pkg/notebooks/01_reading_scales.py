"""
Reading draft scales from character detections
==============================================

From raw glyph boxes to a clean, corrected ladder of scale values.
"""

from draftread import (
    BoundingBox, CharacterDetection, assemble_scales, correct_with_report,
    cross_class_nms, score_scales,
)

# Three scales, 80 (read as "8M"), a stained one, and 76. Each glyph is
# 24x40 px; the stained middle scale was read as "13".
def glyph(label, x, y, conf=0.9):
    return CharacterDetection(BoundingBox(x, y, 24, 40), label, conf)

detections = [
    glyph("8", 100, 100), glyph("M", 130, 100),
    glyph("1", 100, 180), glyph("3", 130, 180),
    glyph("7", 100, 260), glyph("6", 130, 260),
    # a weaker duplicate box with the wrong class sits on top of the '7'
    glyph("1", 102, 264, conf=0.6),
]

kept = cross_class_nms(detections)
print(f"NMS kept {len(kept)} of {len(detections)} boxes")

ladder = assemble_scales(kept)
print("assembled:", ladder.values)

scored = score_scales(ladder)
print("scored:   ", [(s.value_dm, s.scored) for s in scored])

# 80 and 76 are 160 px apart, too far to be neighbors, so nothing scores.
# A fourth scale below 76 gives the ladder a consistent pair to work from.
detections += [glyph("7", 100, 340), glyph("4", 130, 340)]
scored = score_scales(assemble_scales(cross_class_nms(detections)))
print("scored:   ", [(s.value_dm, s.scored) for s in scored])

fixed = correct_with_report(scored)
print("corrected:", fixed.ladder.values, "corrected", fixed.corrected, "scale(s)")
