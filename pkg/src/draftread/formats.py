"""Text and binary file formats: detections, P5 masks, key=value records.

Detection files hold one glyph per line, ``class x y w h confidence``,
with ``#`` comments and blank lines ignored. Coordinates are relative to
the cropped draft-mark patch. Masks are binary PGM (``P5``, maxval 255)
where a pixel value of 128 or more marks water.
"""

from __future__ import annotations

import json
import math
import re
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .core import ALPHABET, BoundingBox, CharacterDetection, SegmentationMask, ValidationError

WATER_THRESHOLD = 128
MISSING = "-"
_DET_FIELDS = ("class", "x", "y", "w", "h", "confidence")


class FormatError(ValueError):
    """Malformed input file; the message names the offending position."""


def _fmt_num(v: float) -> str:
    s = repr(float(v))
    return s[:-2] if s.endswith(".0") else s


def parse_detections(data: bytes | str) -> list[CharacterDetection]:
    text = data.decode("utf-8") if isinstance(data, (bytes, bytearray)) else data
    out = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != len(_DET_FIELDS):
            raise FormatError(f"line {lineno}: expected 6 fields, got {len(parts)}")
        label = parts[0]
        if label not in ALPHABET:
            raise FormatError(f"line {lineno}: field 'class': unknown class {label!r}")
        nums = []
        for name, tok in zip(_DET_FIELDS[1:], parts[1:]):
            try:
                v = float(tok)
            except ValueError:
                raise FormatError(f"line {lineno}: field {name!r}: not a number: {tok!r}") from None
            if not math.isfinite(v):
                raise FormatError(f"line {lineno}: field {name!r}: not finite: {tok!r}")
            nums.append(v)
        try:
            out.append(CharacterDetection(BoundingBox(*nums[:4]), label, nums[4]))
        except ValidationError as exc:
            raise FormatError(f"line {lineno}: {exc}") from None
    return out


def serialize_detections(detections: Iterable[CharacterDetection]) -> str:
    lines = []
    for d in detections:
        b = d.bbox
        nums = " ".join(_fmt_num(v) for v in (b.x, b.y, b.w, b.h, d.confidence))
        lines.append(f"{d.class_label} {nums}\n")
    return "".join(lines)


def _pgm_tokens(data: bytes, count: int) -> tuple[list[bytes], int]:
    """Read ``count`` whitespace-separated header tokens, skipping comments."""
    tokens = []
    pos = 0
    n = len(data)
    while len(tokens) < count:
        while pos < n and data[pos:pos + 1].isspace():
            pos += 1
        if pos < n and data[pos:pos + 1] == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise FormatError(f"byte {pos}: truncated PGM header")
        tokens.append(data[start:pos])
    return tokens, pos


def parse_mask(data: bytes) -> SegmentationMask:
    data = bytes(data)
    if data[:2] != b"P5":
        raise FormatError(f"byte 0: expected magic 'P5', got {data[:2]!r}")
    tokens, pos = _pgm_tokens(data, 4)
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise FormatError(f"byte {pos}: non-integer PGM header field in {tokens[1:]!r}") from None
    if width <= 0 or height <= 0:
        raise FormatError(f"byte {pos}: zero or negative dimensions {width}x{height}")
    if maxval != 255:
        raise FormatError(f"byte {pos}: maxval must be 255, got {maxval}")
    if pos >= len(data) or not data[pos:pos + 1].isspace():
        raise FormatError(f"byte {pos}: missing whitespace before pixel data")
    pos += 1
    need = width * height
    payload = data[pos:pos + need]
    if len(payload) < need:
        raise FormatError(f"byte {pos + len(payload)}: truncated payload, {len(payload)} of {need} pixels")
    pixels = np.frombuffer(payload, dtype=np.uint8).reshape(height, width)
    return SegmentationMask(pixels >= WATER_THRESHOLD)


def serialize_mask(mask: SegmentationMask) -> bytes:
    header = f"P5\n{mask.width} {mask.height}\n255\n".encode("ascii")
    return header + (mask.cells.astype(np.uint8) * 255).tobytes()


def format_value(v: Any) -> str:
    if v is None:
        return MISSING
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return f"{v:.6f}"
    s = str(v)
    if not s or re.search(r"\s|=", s):
        raise ValueError(f"record value {s!r} must be non-empty without spaces or '='")
    return s


def format_record(items: Sequence[tuple[str, Any]], as_json: bool = False) -> str:
    """One output line; field order is exactly the order of ``items``."""
    if as_json:
        return json.dumps({k: (round(v, 6) if isinstance(v, float) else v) for k, v in items})
    return " ".join(f"{k}={format_value(v)}" for k, v in items)


def parse_record(line: str) -> dict[str, str | None]:
    line = line.strip()
    if line.startswith("{"):
        obj = json.loads(line)
        return {k: (None if v is None else str(v)) for k, v in obj.items()}
    out: dict[str, str | None] = {}
    for tok in line.split():
        key, sep, value = tok.partition("=")
        if not sep:
            raise FormatError(f"record token {tok!r} lacks '='")
        out[key] = None if value == MISSING else value
    return out


def parse_records(text: str) -> list[dict[str, str | None]]:
    out = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        try:
            out.append(parse_record(line))
        except (FormatError, json.JSONDecodeError) as exc:
            raise FormatError(f"line {lineno}: {exc}") from None
    return out


def record_float(rec: Mapping[str, str | None], key: str) -> float | None:
    v = rec.get(key)
    if v is None:
        return None
    try:
        return float(v)
    except ValueError:
        raise FormatError(f"field {key!r}: not a number: {v!r}") from None
