"""Rule-based vessel draft reading from glyph detections and a water mask."""

from .boxes import cross_class_nms, iou
from .core import (
    BoundingBox,
    CharacterDetection,
    DepthReading,
    Diagnostics,
    DraftScale,
    Method,
    ScaleLadder,
    SegmentationMask,
    ValidationError,
    WaterlineProfile,
)
from .depth import TemporalWindow, estimate_depth, push_and_average
from .evaluation import EvaluationReport, evaluate, madde, mavd
from .pipeline import EngineConfig, FrameInput, process_frame, run_pipeline
from .scales import (
    SpatialRules,
    assemble_scales,
    correct_scales,
    correct_with_report,
    phi,
    read_ladder,
    score_scales,
)
from .synth import CorruptionSpec, SceneSpec, generate, sample_spec
from .waterline import distance_to_waterline, extract_profile

__version__ = "0.1.0"

__all__ = [
    "BoundingBox", "CharacterDetection", "CorruptionSpec", "DepthReading", "Diagnostics",
    "DraftScale", "EngineConfig", "EvaluationReport", "FrameInput", "Method", "ScaleLadder",
    "SceneSpec", "SegmentationMask", "SpatialRules", "TemporalWindow", "ValidationError",
    "WaterlineProfile", "assemble_scales", "correct_scales", "correct_with_report",
    "cross_class_nms", "distance_to_waterline", "estimate_depth", "evaluate",
    "extract_profile", "generate", "iou", "madde", "mavd", "phi", "process_frame",
    "push_and_average", "read_ladder", "run_pipeline", "sample_spec", "score_scales",
]
