"""Shared domain types for draft reading.

Coordinates are image pixels with the row index increasing downward, so
"below" always means a larger ``y``. Scale readings are stored as integer
decimeters (8.2 m is 82) to keep the 0.2 m spacing test exact.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, fields, replace
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

ALPHABET = frozenset("0123456789M")
ABSENT = -1


class ValidationError(ValueError):
    """A value violates one of the domain invariants."""


def _finite_nonneg(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value) or value < 0:
        raise ValidationError(f"{name} must be finite and >= 0, got {value!r}")
    return value


@dataclass(frozen=True, slots=True)
class BoundingBox:
    """Axis-aligned box given by its center and size, in pixels."""

    x: float
    y: float
    w: float
    h: float

    def __post_init__(self) -> None:
        for f in fields(self):
            object.__setattr__(self, f.name, _finite_nonneg(f.name, getattr(self, f.name)))
        if self.w <= 0 or self.h <= 0:
            raise ValidationError(f"box size must be positive, got w={self.w} h={self.h}")

    @property
    def area(self) -> float:
        return self.w * self.h

    def as_xyxy(self) -> tuple[float, float, float, float]:
        return (
            self.x - self.w / 2,
            self.y - self.h / 2,
            self.x + self.w / 2,
            self.y + self.h / 2,
        )

    def to_dict(self) -> dict[str, float]:
        return {"x": self.x, "y": self.y, "w": self.w, "h": self.h}

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> BoundingBox:
        return cls(d["x"], d["y"], d["w"], d["h"])


@dataclass(frozen=True, slots=True)
class CharacterDetection:
    """One detected draft character: a digit or the unit mark ``'M'``."""

    bbox: BoundingBox
    class_label: str
    confidence: float

    def __post_init__(self) -> None:
        if not isinstance(self.class_label, str) or self.class_label not in ALPHABET:
            raise ValidationError(f"unknown class label {self.class_label!r}")
        conf = float(self.confidence)
        if not 0.0 <= conf <= 1.0:
            raise ValidationError(f"confidence must lie in [0, 1], got {conf!r}")
        object.__setattr__(self, "confidence", conf)

    def to_dict(self) -> dict[str, Any]:
        return {
            "bbox": self.bbox.to_dict(),
            "class_label": self.class_label,
            "confidence": self.confidence,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> CharacterDetection:
        return cls(BoundingBox.from_dict(d["bbox"]), d["class_label"], d["confidence"])


@dataclass(frozen=True, slots=True)
class DraftScale:
    """An assembled two-character scale reading.

    ``value_dm`` may be odd straight out of assembly (a misread such as
    ``"83"``); such a scale can never be scored and gets replaced during
    correction. Corrected ladders only hold even values.
    """

    x_c: float
    y_c: float
    char_height: float
    value_dm: int
    scored: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "x_c", _finite_nonneg("x_c", self.x_c))
        object.__setattr__(self, "y_c", _finite_nonneg("y_c", self.y_c))
        if not math.isfinite(self.char_height) or self.char_height <= 0:
            raise ValidationError(f"char_height must be positive, got {self.char_height!r}")
        object.__setattr__(self, "char_height", float(self.char_height))
        if isinstance(self.value_dm, bool) or int(self.value_dm) != self.value_dm:
            raise ValidationError(f"value_dm must be an integer, got {self.value_dm!r}")
        object.__setattr__(self, "value_dm", int(self.value_dm))
        if self.value_dm < 0:
            raise ValidationError(f"value_dm must be >= 0, got {self.value_dm}")
        object.__setattr__(self, "scored", bool(self.scored))

    @property
    def value_m(self) -> float:
        return self.value_dm / 10.0

    @property
    def is_legal(self) -> bool:
        """True when the value sits on the 0.2 m grid."""
        return self.value_dm % 2 == 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "x_c": self.x_c,
            "y_c": self.y_c,
            "char_height": self.char_height,
            "value_dm": self.value_dm,
            "scored": self.scored,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> DraftScale:
        return cls(d["x_c"], d["y_c"], d["char_height"], d["value_dm"], d["scored"])


@dataclass(frozen=True, slots=True)
class ScaleLadder:
    """Scales ordered top to bottom (``y_c`` non-decreasing).

    Construction only checks the ordering. :meth:`check_corrected` verifies
    the stronger post-correction invariant.
    """

    scales: tuple[DraftScale, ...] = ()

    def __post_init__(self) -> None:
        scales = tuple(self.scales)
        for s in scales:
            if not isinstance(s, DraftScale):
                raise ValidationError(f"ladder entries must be DraftScale, got {type(s).__name__}")
        for a, b in zip(scales, scales[1:]):
            if b.y_c < a.y_c:
                raise ValidationError("ladder must be sorted by y_c ascending")
        object.__setattr__(self, "scales", scales)

    @classmethod
    def from_unsorted(cls, scales: Iterable[DraftScale]) -> ScaleLadder:
        return cls(tuple(sorted(scales, key=lambda s: (s.y_c, s.x_c, -s.value_dm))))

    def __len__(self) -> int:
        return len(self.scales)

    def __iter__(self):
        return iter(self.scales)

    def __getitem__(self, i: int) -> DraftScale:
        return self.scales[i]

    @property
    def values(self) -> tuple[int, ...]:
        return tuple(s.value_dm for s in self.scales)

    @property
    def n_scored(self) -> int:
        return sum(s.scored for s in self.scales)

    def is_corrected(self) -> bool:
        """Strictly increasing ``y_c``, strictly decreasing even values."""
        for a, b in zip(self.scales, self.scales[1:]):
            if not (b.y_c > a.y_c and b.value_dm < a.value_dm):
                return False
        return all(s.is_legal for s in self.scales)

    def check_corrected(self) -> None:
        if not self.is_corrected():
            raise ValidationError(f"ladder violates large-top/small-bottom order: {self.values}")

    def to_dict(self) -> dict[str, Any]:
        return {"scales": [s.to_dict() for s in self.scales]}

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> ScaleLadder:
        return cls(tuple(DraftScale.from_dict(s) for s in d["scales"]))


def _frozen_array(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SegmentationMask:
    """Binary water mask, shape ``(H, W)``; True marks water."""

    cells: np.ndarray

    def __post_init__(self) -> None:
        cells = np.asarray(self.cells)
        if cells.ndim != 2 or cells.shape[0] == 0 or cells.shape[1] == 0:
            raise ValidationError(f"mask must be a non-empty 2-D grid, got shape {cells.shape}")
        if cells.dtype != np.bool_:
            if not np.isin(cells, (0, 1)).all():
                raise ValidationError("mask cells must be 0 or 1")
            cells = cells.astype(np.bool_)
        object.__setattr__(self, "cells", _frozen_array(cells))

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> SegmentationMask:
        return cls(np.asarray(rows))

    @property
    def width(self) -> int:
        return int(self.cells.shape[1])

    @property
    def height(self) -> int:
        return int(self.cells.shape[0])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SegmentationMask):
            return NotImplemented
        return np.array_equal(self.cells, other.cells)

    __hash__ = None  # type: ignore[assignment]

    def to_dict(self) -> dict[str, Any]:
        return {"width": self.width, "height": self.height,
                "cells": self.cells.astype(np.uint8).ravel().tolist()}

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> SegmentationMask:
        cells = np.asarray(d["cells"], dtype=np.int64)
        if cells.size != d["width"] * d["height"]:
            raise ValidationError("mask cell count does not match width*height")
        return cls(cells.reshape(d["height"], d["width"]))


@dataclass(frozen=True, eq=False)
class WaterlineProfile:
    """Row of the topmost water pixel per column.

    Absent columns (no water at all) hold :data:`ABSENT`. ``height`` is the
    originating mask height when known.
    """

    rows: np.ndarray
    height: int | None = None

    def __post_init__(self) -> None:
        raw = self.rows
        if not isinstance(raw, np.ndarray):
            raw = [ABSENT if r is None else r for r in raw]
        rows = np.asarray(raw, dtype=np.int64)
        if rows.ndim != 1 or rows.size == 0:
            raise ValidationError("profile rows must be a non-empty 1-D sequence")
        if (rows < ABSENT).any():
            raise ValidationError("profile rows must be >= 0 or absent")
        if self.height is not None and (rows >= self.height).any():
            raise ValidationError(f"profile rows must be < mask height {self.height}")
        object.__setattr__(self, "rows", _frozen_array(rows))

    @property
    def width(self) -> int:
        return int(self.rows.size)

    @property
    def present(self) -> np.ndarray:
        return self.rows != ABSENT

    def row(self, w: int) -> int | None:
        r = int(self.rows[w])
        return None if r == ABSENT else r

    def as_list(self) -> list[int | None]:
        return [None if r == ABSENT else int(r) for r in self.rows]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, WaterlineProfile):
            return NotImplemented
        return np.array_equal(self.rows, other.rows) and self.height == other.height

    __hash__ = None  # type: ignore[assignment]

    def to_dict(self) -> dict[str, Any]:
        return {"rows": self.as_list(), "height": self.height}

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> WaterlineProfile:
        return cls(d["rows"], d.get("height"))


class Method(str, enum.Enum):
    TWO_SCALE = "TwoScale"
    SINGLE_SCALE = "SingleScale"
    FAILED = "Failed"


@dataclass(frozen=True, slots=True)
class Diagnostics:
    detections: int = 0
    kept_after_nms: int = 0
    assembled: int = 0
    unpaired: int = 0
    scored: int = 0
    corrected: int = 0
    dropped: int = 0
    low_confidence: bool = False
    failed_stage: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> Diagnostics:
        return cls(**d)


@dataclass(frozen=True, slots=True)
class DepthReading:
    depth_m: float | None
    method: Method
    scales_used: tuple[DraftScale, ...] = ()
    waterline_row: float | None = None
    diagnostics: Diagnostics = field(default_factory=Diagnostics)

    def __post_init__(self) -> None:
        method = Method(self.method)
        object.__setattr__(self, "method", method)
        object.__setattr__(self, "scales_used", tuple(self.scales_used))
        if method is Method.FAILED:
            if self.depth_m is not None:
                raise ValidationError("a failed reading carries no depth")
        else:
            if self.depth_m is None:
                raise ValidationError(f"{method.value} reading needs a depth")
            object.__setattr__(self, "depth_m", _finite_nonneg("depth_m", self.depth_m))

    @property
    def ok(self) -> bool:
        return self.method is not Method.FAILED

    @classmethod
    def failed(cls, stage: str, diagnostics: Diagnostics | None = None) -> DepthReading:
        diagnostics = diagnostics or Diagnostics()
        return cls(None, Method.FAILED, diagnostics=replace(diagnostics, failed_stage=stage))

    def to_dict(self) -> dict[str, Any]:
        return {
            "depth_m": self.depth_m,
            "method": self.method.value,
            "scales_used": [s.to_dict() for s in self.scales_used],
            "waterline_row": self.waterline_row,
            "diagnostics": self.diagnostics.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> DepthReading:
        return cls(
            d["depth_m"],
            Method(d["method"]),
            tuple(DraftScale.from_dict(s) for s in d["scales_used"]),
            d["waterline_row"],
            Diagnostics.from_dict(d["diagnostics"]),
        )
