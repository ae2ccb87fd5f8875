"""Single-threaded throughput harness for the post-processing pipeline.

Frames are held as raw file bytes so parsing is part of the measured work,
just as in ``draftread read``; disk I/O is not.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .formats import parse_detections, parse_mask
from .pipeline import EngineConfig, process_frame


@dataclass(frozen=True)
class BenchResult:
    frames: int
    seconds: float

    @property
    def fps(self) -> float:
        return self.frames / self.seconds

    @property
    def ms_per_frame(self) -> float:
        return 1000.0 * self.seconds / self.frames


def load_frames(directories: Sequence[str | Path]) -> list[tuple[bytes, bytes]]:
    return [((Path(d) / "detections.txt").read_bytes(), (Path(d) / "mask.pgm").read_bytes())
            for d in directories]


def measure_throughput(frames: Sequence[tuple[bytes, bytes]],
                       config: EngineConfig | None = None,
                       min_seconds: float = 1.0, warmup: int = 5) -> BenchResult:
    """Loop over ``frames`` until at least ``min_seconds`` have elapsed."""
    config = config or EngineConfig()
    window = config.new_window()

    def one(det_bytes: bytes, mask_bytes: bytes) -> None:
        window.push(process_frame(parse_detections(det_bytes), parse_mask(mask_bytes), config))

    for i in range(warmup):
        one(*frames[i % len(frames)])
    n = 0
    start = time.perf_counter()
    elapsed = 0.0
    while elapsed < min_seconds:
        for det_bytes, mask_bytes in frames:
            one(det_bytes, mask_bytes)
        n += len(frames)
        elapsed = time.perf_counter() - start
    return BenchResult(n, elapsed)
