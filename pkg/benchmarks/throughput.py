"""Single-threaded frames/s of the post-processing pipeline on fixture frames.

Usage: python3 benchmarks/throughput.py [FRAME_DIR ...]
Defaults to every frame directory under fixtures/.
"""

import sys
from pathlib import Path

from draftread.benchmark import load_frames, measure_throughput

root = Path(__file__).resolve().parent.parent / "fixtures"
dirs = sys.argv[1:] or sorted(p.parent for p in root.glob("*/detections.txt"))
result = measure_throughput(load_frames(dirs), min_seconds=2.0)
print(f"{len(dirs)} frame(s): {result.fps:.0f} frames/s, {result.ms_per_frame:.2f} ms/frame")
