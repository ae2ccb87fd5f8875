"""Waterline (MAVD) and draft depth (MADDE) error metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import WaterlineProfile


class UndefinedMetricError(ValueError):
    pass


def mavd_detail(pred: WaterlineProfile, label: WaterlineProfile) -> tuple[float, int]:
    """Mean absolute vertical distance and the number of excluded columns.

    Columns where either profile has no water are left out of the mean.
    """
    if pred.width != label.width:
        raise ValueError(f"profile widths differ: {pred.width} vs {label.width}")
    both = pred.present & label.present
    n = int(both.sum())
    if n == 0:
        raise UndefinedMetricError("no column has water in both profiles")
    diff = np.abs(label.rows[both] - pred.rows[both])
    return int(diff.sum()) / n, pred.width - n


def mavd(pred: WaterlineProfile, label: WaterlineProfile) -> float:
    return mavd_detail(pred, label)[0]


def madde(pred_depths: Sequence[float], label_depths: Sequence[float]) -> tuple[float, float]:
    """Mean absolute depth error and its population standard deviation."""
    if len(pred_depths) != len(label_depths):
        raise ValueError(f"length mismatch: {len(pred_depths)} vs {len(label_depths)}")
    if not pred_depths:
        raise UndefinedMetricError("madde needs at least one frame")
    errors = [abs(l - p) for p, l in zip(pred_depths, label_depths)]
    return _mean_std(errors)


def _mean_std(values: Sequence[float]) -> tuple[float, float]:
    n = len(values)
    mean = math.fsum(values) / n
    var = math.fsum((v - mean) ** 2 for v in values) / n
    return mean, math.sqrt(var)


@dataclass(frozen=True)
class FrameScore:
    frame_id: str
    mavd: float | None
    depth_error: float | None
    excluded_columns: int = 0


@dataclass(frozen=True)
class EvaluationReport:
    """Aggregate MAVD (pixels) and MADDE (meters) over a set of frames.

    Spreads are population standard deviations. Frames without a predicted
    depth are counted in ``failed_frames`` and left out of MADDE.
    """

    mavd_mean: float | None
    mavd_std: float | None
    madde_mean: float | None
    madde_std: float | None
    per_frame: tuple[FrameScore, ...] = ()
    excluded_columns: int = 0
    failed_frames: int = 0
    frames: int = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "frames", len(self.per_frame))


def evaluate(
    frame_ids: Sequence[str],
    pred_profiles: Sequence[WaterlineProfile | None],
    label_profiles: Sequence[WaterlineProfile | None],
    pred_depths: Sequence[float | None],
    label_depths: Sequence[float | None],
) -> EvaluationReport:
    """Score frames one by one, then reduce in input order."""
    n = len(frame_ids)
    if not (len(pred_profiles) == len(label_profiles) == len(pred_depths)
            == len(label_depths) == n):
        raise ValueError("all per-frame sequences must have the same length")
    scores = []
    excluded = failed = 0
    for i in range(n):
        m = None
        ex = 0
        if pred_profiles[i] is not None and label_profiles[i] is not None:
            try:
                m, ex = mavd_detail(pred_profiles[i], label_profiles[i])
            except UndefinedMetricError:
                ex = pred_profiles[i].width
        err = None
        if label_depths[i] is not None:
            if pred_depths[i] is None:
                failed += 1
            else:
                err = abs(label_depths[i] - pred_depths[i])
        excluded += ex
        scores.append(FrameScore(frame_ids[i], m, err, ex))
    mavds = [s.mavd for s in scores if s.mavd is not None]
    errs = [s.depth_error for s in scores if s.depth_error is not None]
    mv = _mean_std(mavds) if mavds else (None, None)
    md = _mean_std(errs) if errs else (None, None)
    return EvaluationReport(mv[0], mv[1], md[0], md[1], tuple(scores), excluded, failed)
