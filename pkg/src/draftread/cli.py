"""Command-line entry point: ``draftread {read,eval,synth,version}``.

Exit codes: 0 success, 1 bad input, 2 internal invariant failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from . import __version__
from .core import ValidationError
from .evaluation import evaluate
from .formats import FormatError, format_record, parse_mask, parse_records, record_float
from .pipeline import EngineConfig, FrameInput, compute_frame
from .synth import SceneSpec, generate, write_fixture
from .waterline import extract_profile

EXIT_OK, EXIT_BAD_INPUT, EXIT_INTERNAL = 0, 1, 2


class BadInput(Exception):
    pass


def read_manifest(path: Path) -> list[FrameInput]:
    """``frame_id detections_path mask_path [timestamp_ms]`` per line."""
    frames = []
    base = path.parent
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (3, 4):
            raise BadInput(f"{path}:{lineno}: expected 3 or 4 fields, got {len(parts)}")
        try:
            ts = int(parts[3]) if len(parts) == 4 else None
        except ValueError:
            raise BadInput(f"{path}:{lineno}: timestamp_ms must be an integer") from None
        frames.append(FrameInput(base / parts[1], base / parts[2], parts[0], ts))
    return frames


def _config_from_args(args: argparse.Namespace) -> EngineConfig:
    overrides = {
        "nms_threshold": args.nms_threshold,
        "frame_rate": args.frame_rate,
        "neighbor_gap_factor": args.gap_factor,
        "printed_eq10_compat": True if args.ratio_only else None,
    }
    return EngineConfig.load(args.config, overrides)


def cmd_read(args: argparse.Namespace, out) -> int:
    config = _config_from_args(args)
    frames = [FrameInput.from_directory(d) for d in args.frames]
    if args.manifest:
        frames += read_manifest(Path(args.manifest))
    if not frames:
        raise BadInput("no frames given")
    if args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            results = list(pool.map(lambda f: compute_frame(f, config), frames))
    else:
        results = [compute_frame(f, config) for f in frames]

    window = config.new_window()
    status = EXIT_OK
    for res in results:
        avg = window.push(res.reading)
        stage = res.reading.diagnostics.failed_stage
        if stage == "parse":
            status = max(status, EXIT_BAD_INPUT)
        elif stage == "internal":
            status = EXIT_INTERNAL
        res = replace(res, average_m=avg)
        out.write(format_record(res.record_items(), args.json) + "\n")
    return status


def _resolve(path: str, record_file: Path) -> Path:
    p = Path(path)
    if p.is_absolute() or p.exists():
        return p
    return record_file.parent / p


def _load_profile(path: str | None, record_file: Path):
    if path is None:
        return None
    try:
        return extract_profile(parse_mask(_resolve(path, record_file).read_bytes()))
    except FormatError as exc:
        raise FormatError(f"{path}: {exc}") from None


def cmd_eval(args: argparse.Namespace, out) -> int:
    pred_file, label_file = Path(args.pred), Path(args.labels)
    preds = {r.get("frame_id"): r for r in parse_records(pred_file.read_text(encoding="utf-8"))}
    labels = parse_records(label_file.read_text(encoding="utf-8"))
    ids, pp, lp, pd, ld = [], [], [], [], []
    for lab in labels:
        fid = lab.get("frame_id")
        if fid not in preds:
            raise BadInput(f"no prediction for frame {fid!r}")
        pred = preds[fid]
        ids.append(fid)
        pp.append(_load_profile(pred.get("mask"), pred_file))
        lp.append(_load_profile(lab.get("mask"), label_file))
        pd.append(record_float(pred, args.depth_field))
        ld.append(record_float(lab, "depth_m"))
    report = evaluate(ids, pp, lp, pd, ld)
    for s in report.per_frame:
        out.write(format_record([
            ("frame_id", s.frame_id), ("mavd", s.mavd),
            ("depth_error", s.depth_error), ("excluded_columns", s.excluded_columns),
        ], args.json) + "\n")
    out.write(format_record([
        ("summary", "all"), ("frames", report.frames),
        ("mavd_mean", report.mavd_mean), ("mavd_std", report.mavd_std),
        ("madde_mean", report.madde_mean), ("madde_std", report.madde_std),
        ("excluded_columns", report.excluded_columns), ("failed_frames", report.failed_frames),
    ], args.json) + "\n")
    return EXIT_OK


def cmd_synth(args: argparse.Namespace, out) -> int:
    doc = json.loads(Path(args.spec).read_text(encoding="utf-8"))
    scenes = doc["scenes"] if "scenes" in doc else {"": doc}
    root = Path(args.output)
    for name, spec_dict in sorted(scenes.items()):
        scene = generate(SceneSpec.from_dict(spec_dict))
        target = write_fixture(scene, root / name if name else root)
        out.write(format_record([
            ("fixture", target.as_posix()), ("truth_depth_m", scene.truth_depth_m),
            ("recoverable", scene.recoverable),
        ]) + "\n")
    return EXIT_OK


def cmd_version(args: argparse.Namespace, out) -> int:
    out.write(f"draftread {__version__}\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="draftread", description="Vessel draft reading engine")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("read", help="frames -> depth records")
    p.add_argument("frames", nargs="*", help="frame directories holding detections.txt and mask.pgm")
    p.add_argument("--manifest", help="file listing 'frame_id detections mask [timestamp_ms]'")
    p.add_argument("--config", help="JSON engine config; flags override it")
    p.add_argument("--nms-threshold", type=float)
    p.add_argument("--frame-rate", type=float)
    p.add_argument("--gap-factor", type=float)
    p.add_argument("--ratio-only", action="store_true",
                   help="use the ratio-only two-scale formula (comparison runs only)")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--json", action="store_true", help="emit JSON lines instead of key=value")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_read)

    p = sub.add_parser("eval", help="predictions + labels -> MAVD/MADDE report")
    p.add_argument("--pred", required=True, help="records from 'read' (frame_id, depth_m, mask)")
    p.add_argument("--labels", required=True, help="records with frame_id, depth_m, mask")
    p.add_argument("--depth-field", default="depth_m", choices=("depth_m", "avg_m"))
    p.add_argument("--json", action="store_true")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", help="SceneSpec JSON -> fixture directory")
    p.add_argument("spec")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("version")
    p.set_defaults(func=cmd_version)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    target = getattr(args, "output", None) if args.command in ("read", "eval") else None
    try:
        if target:
            with open(target, "w", encoding="utf-8", newline="\n") as fh:
                return args.func(args, fh)
        return args.func(args, sys.stdout) or EXIT_OK
    except (BadInput, FormatError, ValidationError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"draftread: error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except Exception as exc:  # noqa: BLE001
        print(f"draftread: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
