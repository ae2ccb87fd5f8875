"""Box overlap and cross-class non-maximum suppression."""

from __future__ import annotations

from typing import Sequence

from .core import BoundingBox, CharacterDetection

DEFAULT_NMS_THRESHOLD = 0.3


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection over union of two center-format boxes (continuous areas)."""
    # overlap of two centered intervals; exact for identical boxes
    ix = min(a.w, b.w, (a.w + b.w) / 2 - abs(a.x - b.x))
    iy = min(a.h, b.h, (a.h + b.h) / 2 - abs(a.y - b.y))
    if ix <= 0 or iy <= 0:
        return 0.0
    inter = ix * iy
    union = a.w * a.h + b.w * b.h - inter
    return min(1.0, inter / union)


def _priority(det: CharacterDetection) -> tuple:
    return (-det.confidence, det.bbox.y, det.bbox.x, det.class_label)


def cross_class_nms(
    detections: Sequence[CharacterDetection],
    threshold: float = DEFAULT_NMS_THRESHOLD,
) -> list[CharacterDetection]:
    """Greedy NMS that ignores class labels.

    Detections are visited by descending confidence (ties broken by
    ``(y, x, class_label)``); one is kept unless it overlaps an already kept
    detection with IoU strictly above ``threshold``. The survivors come back
    in their original input order.
    """
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold must lie in (0, 1), got {threshold!r}")
    order = sorted(range(len(detections)), key=lambda i: _priority(detections[i]))
    kept: list[int] = []
    for i in order:
        box = detections[i].bbox
        if all(iou(box, detections[k].bbox) <= threshold for k in kept):
            kept.append(i)
    kept.sort()
    return [detections[i] for i in kept]
