"""Per-frame pipeline: detections + mask -> corrected ladder -> depth."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Mapping, Sequence

from .boxes import DEFAULT_NMS_THRESHOLD, cross_class_nms
from .core import CharacterDetection, DepthReading, Diagnostics, SegmentationMask, ValidationError
from .depth import DEFAULT_FRAME_RATE, TemporalWindow, estimate_depth
from .formats import FormatError, parse_detections, parse_mask
from .scales import SpatialRules, assemble_with_report, correct_with_report, score_scales
from .waterline import extract_profile

RULE_KEYS = ("scale_spacing_dm", "char_height_m", "neighbor_gap_factor", "require_order")


@dataclass(frozen=True)
class EngineConfig:
    nms_threshold: float = DEFAULT_NMS_THRESHOLD
    rules: SpatialRules = field(default_factory=SpatialRules)
    frame_rate: float = DEFAULT_FRAME_RATE
    printed_eq10_compat: bool = False

    def __post_init__(self) -> None:
        if not 0 < self.nms_threshold < 1:
            raise ValidationError(f"nms_threshold must lie in (0, 1), got {self.nms_threshold}")
        if not self.frame_rate > 0:
            raise ValidationError(f"frame_rate must be positive, got {self.frame_rate}")

    def new_window(self) -> TemporalWindow:
        return TemporalWindow.for_frame_rate(self.frame_rate)

    def to_dict(self) -> dict[str, Any]:
        d = {f.name: getattr(self, f.name) for f in fields(self) if f.name != "rules"}
        d.update(asdict(self.rules))
        return d

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> EngineConfig:
        """Flat mapping; spatial-rule keys may also sit under ``"rules"``."""
        d = dict(d)
        rule_args = dict(d.pop("rules", {}) or {})
        for k in RULE_KEYS:
            if k in d:
                rule_args[k] = d.pop(k)
        unknown = set(d) - {f.name for f in fields(cls)}
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        return cls(rules=SpatialRules(**rule_args), **d)

    @classmethod
    def load(cls, path: str | Path, overrides: Mapping[str, Any] | None = None) -> EngineConfig:
        """Read a JSON config file; non-None ``overrides`` win."""
        d = json.loads(Path(path).read_text(encoding="utf-8")) if path else {}
        d = dict(d)
        d.update(d.pop("rules", {}) or {})
        d = dict(cls().to_dict(), **d)
        d.update({k: v for k, v in (overrides or {}).items() if v is not None})
        return cls.from_dict(d)


@dataclass(frozen=True)
class FrameInput:
    detections_path: Path
    mask_path: Path
    frame_id: str
    timestamp_ms: int | None = None

    @classmethod
    def from_directory(cls, directory: str | Path) -> FrameInput:
        d = Path(directory)
        return cls(d / "detections.txt", d / "mask.pgm", d.name)

    def load(self) -> tuple[list[CharacterDetection], SegmentationMask]:
        try:
            dets = parse_detections(Path(self.detections_path).read_bytes())
        except FormatError as exc:
            raise FormatError(f"{self.detections_path}: {exc}") from None
        try:
            mask = parse_mask(Path(self.mask_path).read_bytes())
        except FormatError as exc:
            raise FormatError(f"{self.mask_path}: {exc}") from None
        return dets, mask


@dataclass(frozen=True)
class FrameResult:
    frame_id: str
    reading: DepthReading
    average_m: float | None = None
    timestamp_ms: int | None = None
    error: str | None = None
    mask_path: str | None = None

    def record_items(self) -> list[tuple[str, Any]]:
        r = self.reading
        diag = r.diagnostics
        used = r.scales_used
        return [
            ("frame_id", self.frame_id),
            ("timestamp_ms", self.timestamp_ms),
            ("method", r.method.value),
            ("depth_m", r.depth_m),
            ("avg_m", self.average_m),
            ("waterline_row", r.waterline_row),
            ("s1_dm", used[0].value_dm if used else None),
            ("s2_dm", used[1].value_dm if len(used) > 1 else None),
            ("detections", diag.detections),
            ("kept", diag.kept_after_nms),
            ("assembled", diag.assembled),
            ("unpaired", diag.unpaired),
            ("scored", diag.scored),
            ("corrected", diag.corrected),
            ("dropped", diag.dropped),
            ("low_confidence", diag.low_confidence),
            ("failed_stage", diag.failed_stage),
            ("error", self.error),
            ("mask", self.mask_path),
        ]


def process_frame(
    detections: Sequence[CharacterDetection],
    mask: SegmentationMask,
    config: EngineConfig = EngineConfig(),
) -> DepthReading:
    """Run every pure stage on one frame; stage failures come back as Failed."""
    diag = Diagnostics(detections=len(detections))
    kept = cross_class_nms(detections, config.nms_threshold)
    diag = replace(diag, kept_after_nms=len(kept))
    assembled = assemble_with_report(kept)
    diag = replace(diag, assembled=len(assembled.ladder), unpaired=assembled.unpaired)
    if not len(assembled.ladder):
        return DepthReading.failed("assembly", diag)
    scored = score_scales(assembled.ladder, config.rules)
    diag = replace(diag, scored=scored.n_scored)
    fix = correct_with_report(scored, config.rules)
    diag = replace(diag, corrected=fix.corrected, dropped=fix.dropped,
                   low_confidence=fix.low_confidence)
    if not len(fix.ladder):
        return DepthReading.failed("correction", diag)
    profile = extract_profile(mask)
    reading = estimate_depth(fix.ladder, profile, config.rules,
                             ratio_only=config.printed_eq10_compat)
    if not reading.ok:
        return DepthReading.failed(reading.diagnostics.failed_stage or "depth", diag)
    return replace(reading, diagnostics=diag)


def compute_frame(frame: FrameInput, config: EngineConfig) -> FrameResult:
    """Stateless half of :func:`run_pipeline`; safe to call from worker threads."""
    try:
        dets, mask = frame.load()
    except (FormatError, OSError, ValidationError) as exc:
        return FrameResult(frame.frame_id, DepthReading.failed("parse"), None,
                           frame.timestamp_ms, type(exc).__name__, str(frame.mask_path))
    try:
        reading = process_frame(dets, mask, config)
        error = None
    except Exception as exc:  # noqa: BLE001 - one bad frame must not stop the stream
        reading = DepthReading.failed("internal", Diagnostics(detections=len(dets)))
        error = type(exc).__name__
    return FrameResult(frame.frame_id, reading, None, frame.timestamp_ms, error,
                       str(frame.mask_path))


def run_pipeline(frame: FrameInput, config: EngineConfig,
                 window: TemporalWindow) -> FrameResult:
    """Process one frame and fold it into the stream's one-second window."""
    result = compute_frame(frame, config)
    return replace(result, average_m=window.push(result.reading))
