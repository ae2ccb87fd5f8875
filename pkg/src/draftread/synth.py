"""Deterministic synthetic draft-mark scenes with exact ground truth.

A scene is a ladder of two-glyph scales, top-large/bottom-small, plus a
water mask whose surface row is placed so that the ladder reads
``true_depth_m`` there. Corruption (stains, misreads, duplicate boxes,
positional jitter) touches the emitted detections only; the truth is kept.

Randomness comes from a PCG64 generator seeded by ``SceneSpec.seed`` and
nothing else.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .core import (
    ALPHABET, BoundingBox, CharacterDetection, DraftScale, ScaleLadder,
    SegmentationMask, ValidationError, WaterlineProfile,
)
from .scales import DEFAULT_RULES

GLYPH_WIDTH_RATIO = 0.6
GLYPH_GAP_RATIO = 0.25


def reading_of(value_dm: int) -> str:
    """Two-glyph reading of a grid value: 80 -> '8M', 82 -> '82', 6 -> '06'."""
    tens, units = divmod(value_dm, 10)
    return f"{tens}{'M' if units == 0 else units}"


@dataclass(frozen=True)
class CorruptionSpec:
    """Detection-side damage applied to a scene.

    ``misread_map`` maps a scale index to the two-glyph reading the
    detector reports instead of the true one. ``shadow_indices`` adds a
    lower-confidence, wrong-class duplicate over each glyph of those scales.
    ``hide_submerged`` suppresses glyphs whose center is under water.
    """

    drop_indices: frozenset[int] = frozenset()
    misread_map: Mapping[int, str] = field(default_factory=dict)
    jitter_px: float = 0.0
    shadow_indices: frozenset[int] = frozenset()
    hide_submerged: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "drop_indices", frozenset(int(i) for i in self.drop_indices))
        object.__setattr__(self, "shadow_indices", frozenset(int(i) for i in self.shadow_indices))
        object.__setattr__(self, "misread_map", {int(k): str(v) for k, v in self.misread_map.items()})
        for k, reading in self.misread_map.items():
            if len(reading) != 2 or any(c not in ALPHABET for c in reading):
                raise ValidationError(f"misread for scale {k} must be two glyphs, got {reading!r}")
        if self.jitter_px < 0:
            raise ValidationError("jitter_px must be >= 0")

    @property
    def touched(self) -> frozenset[int]:
        return self.drop_indices | frozenset(self.misread_map)

    def to_dict(self) -> dict[str, Any]:
        return {
            "drop_indices": sorted(self.drop_indices),
            "misread_map": {str(k): v for k, v in sorted(self.misread_map.items())},
            "jitter_px": self.jitter_px,
            "shadow_indices": sorted(self.shadow_indices),
            "hide_submerged": self.hide_submerged,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> CorruptionSpec:
        return cls(
            frozenset(d.get("drop_indices", ())),
            {int(k): v for k, v in d.get("misread_map", {}).items()},
            float(d.get("jitter_px", 0.0)),
            frozenset(d.get("shadow_indices", ())),
            bool(d.get("hide_submerged", False)),
        )


@dataclass(frozen=True)
class SceneSpec:
    seed: int
    ladder_top_value_dm: int
    scale_count: int
    char_height_px: float
    spacing_px: float
    image_size: tuple[int, int]
    true_depth_m: float
    wave_amplitude_px: float = 0.0
    corruption: CorruptionSpec = field(default_factory=CorruptionSpec)
    wave_period_px: float | None = None
    wave_phase: float | None = None
    ladder_top_row: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "image_size", tuple(int(v) for v in self.image_size))
        top, k = self.ladder_top_value_dm, self.scale_count
        step = DEFAULT_RULES.scale_spacing_dm
        if top % step or not 0 <= top <= 98:
            raise ValidationError(f"ladder top {top} dm is not a two-glyph grid value")
        if k < 2 or top - step * (k - 1) < 0:
            raise ValidationError(f"cannot place {k} scales below {top} dm")
        if not self.char_height_px > 0 or not self.spacing_px > self.char_height_px:
            raise ValidationError("spacing_px must exceed char_height_px > 0")
        bottom = top - step * (k - 1)
        if not bottom / 10 < self.true_depth_m < top / 10:
            raise ValidationError(
                f"true depth {self.true_depth_m} m outside ladder span ({bottom / 10}, {top / 10})"
            )
        if self.wave_amplitude_px < 0:
            raise ValidationError("wave_amplitude_px must be >= 0")
        bad = [i for i in self.corruption.touched | self.corruption.shadow_indices
               if not 0 <= i < k]
        if bad:
            raise ValidationError(f"corruption indices out of range: {sorted(bad)}")

    @property
    def values_dm(self) -> list[int]:
        step = DEFAULT_RULES.scale_spacing_dm
        return [self.ladder_top_value_dm - step * i for i in range(self.scale_count)]

    @property
    def px_per_dm(self) -> float:
        return self.spacing_px / DEFAULT_RULES.scale_spacing_dm

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["image_size"] = list(self.image_size)
        d["corruption"] = self.corruption.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> SceneSpec:
        d = dict(d)
        d["corruption"] = CorruptionSpec.from_dict(d.get("corruption", {}))
        d["image_size"] = tuple(d["image_size"])
        return cls(**d)


@dataclass(frozen=True, eq=False)
class SyntheticScene:
    spec: SceneSpec
    detections: tuple[CharacterDetection, ...]
    mask: SegmentationMask
    truth_ladder: ScaleLadder
    truth_profile: WaterlineProfile
    truth_depth_m: float
    waterline_row: float
    emitted_indices: tuple[int, ...]

    @property
    def expected_ladder(self) -> ScaleLadder:
        """Truth restricted to scales whose glyphs were emitted."""
        return ScaleLadder(tuple(self.truth_ladder[i] for i in self.emitted_indices))

    @property
    def recoverable(self) -> bool:
        """True when two adjacent emitted scales escaped misreading."""
        clean = set(self.emitted_indices) - set(self.spec.corruption.misread_map)
        return any(i + 1 in clean for i in clean)


def _top_row_range(spec: SceneSpec, offset: float) -> tuple[int, int]:
    _, height = spec.image_size
    h, a = spec.char_height_px, spec.wave_amplitude_px
    span = (spec.scale_count - 1) * spec.spacing_px
    lo = max(h, a - offset)
    hi = min(height - h - span, height - 1 - a - offset)
    return math.ceil(lo), math.floor(hi)


def generate(spec: SceneSpec) -> SyntheticScene:
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    width, height = spec.image_size
    h = spec.char_height_px
    w = GLYPH_WIDTH_RATIO * h
    half_pair = (w + GLYPH_GAP_RATIO * w) / 2

    # rows below the top scale center at which the ladder reads true_depth_m
    offset = (spec.ladder_top_value_dm - 10 * spec.true_depth_m) * spec.px_per_dm
    lo, hi = _top_row_range(spec, offset)
    if spec.ladder_top_row is not None:
        y_top = int(spec.ladder_top_row)
        if not lo <= y_top <= hi:
            raise ValidationError(f"ladder_top_row {y_top} outside feasible range [{lo}, {hi}]")
    elif lo > hi:
        raise ValidationError(f"ladder of {spec.scale_count} scales does not fit a {width}x{height} image")
    else:
        y_top = int(rng.integers(lo, hi + 1))
    margin = math.ceil(h + half_pair + w)
    if width - 1 - margin < margin:
        raise ValidationError(f"image width {width} too small for glyphs of height {h}")
    x_c = float(rng.integers(margin, width - margin))

    y_water = y_top + offset
    period = spec.wave_period_px or float(width)
    phase = spec.wave_phase if spec.wave_phase is not None else float(rng.uniform(0, 2 * math.pi))
    cols = np.arange(width)
    surface = y_water + spec.wave_amplitude_px * np.sin(2 * math.pi * cols / period + phase)
    rows = np.clip(np.rint(surface), 0, height - 1).astype(np.int64)
    cells = np.arange(height)[:, None] >= rows[None, :]
    mask = SegmentationMask(cells)
    profile = WaterlineProfile(rows, height)

    values = spec.values_dm
    truth = ScaleLadder(tuple(
        DraftScale(x_c, y_top + i * spec.spacing_px, h, v, True) for i, v in enumerate(values)
    ))

    c = spec.corruption
    dets: list[CharacterDetection] = []
    emitted = []
    x_col = int(round(x_c))
    for i, scale in enumerate(truth):
        if i in c.drop_indices:
            continue
        if c.hide_submerged and scale.y_c >= rows[x_col]:
            continue
        emitted.append(i)
        reading = c.misread_map.get(i, reading_of(values[i]))
        for glyph, gx in zip(reading, (x_c - half_pair, x_c + half_pair)):
            gy = scale.y_c
            if c.jitter_px:
                gx += float(rng.uniform(-c.jitter_px, c.jitter_px))
                gy += float(rng.uniform(-c.jitter_px, c.jitter_px))
            conf = float(rng.uniform(0.7, 0.99))
            dets.append(CharacterDetection(BoundingBox(gx, gy, w, h), glyph, conf))
            if i in c.shadow_indices:
                others = sorted(ALPHABET - {glyph})
                wrong = others[int(rng.integers(len(others)))]
                shadow = BoundingBox(gx + 0.1 * w, gy + 0.1 * h, w, h)
                dets.append(CharacterDetection(shadow, wrong, 0.8 * conf))
    order = rng.permutation(len(dets))
    return SyntheticScene(
        spec=spec,
        detections=tuple(dets[k] for k in order),
        mask=mask,
        truth_ladder=truth,
        truth_profile=profile,
        truth_depth_m=spec.true_depth_m,
        waterline_row=float(y_water),
        emitted_indices=tuple(emitted),
    )


def sample_spec(
    seed: int,
    *,
    scale_count: tuple[int, int] = (4, 10),
    char_height_px: tuple[float, float] = (20.0, 48.0),
    wave_amplitude_px: float = 0.0,
    corruption: CorruptionSpec | None = None,
    image_width: int = 256,
) -> SceneSpec:
    """Draw a physically consistent spec (spacing = two glyph heights).

    The image height is sized to fit the whole ladder plus waves.
    """
    rng = np.random.Generator(np.random.PCG64([seed, 0x5CE4E]))
    k = int(rng.integers(scale_count[0], scale_count[1] + 1))
    h = float(rng.integers(int(char_height_px[0]), int(char_height_px[1]) + 1))
    spacing = 2 * h
    step = DEFAULT_RULES.scale_spacing_dm
    top = step * int(rng.integers(k - 1, 98 // step + 1))
    bottom = top - step * (k - 1)
    depth = round(float(rng.uniform(bottom / 10, top / 10)), 3)
    depth = min(max(depth, bottom / 10 + 0.001), top / 10 - 0.001)
    height = int(math.ceil((k - 1) * spacing + 4 * h + 2 * wave_amplitude_px + 4))
    return SceneSpec(
        seed=seed,
        ladder_top_value_dm=top,
        scale_count=k,
        char_height_px=h,
        spacing_px=spacing,
        image_size=(image_width, height),
        true_depth_m=depth,
        wave_amplitude_px=wave_amplitude_px,
        corruption=corruption or CorruptionSpec(),
    )


def write_fixture(scene: SyntheticScene, directory: str | Path) -> Path:
    """Write ``detections.txt``, ``mask.pgm`` and ``truth.json`` into ``directory``."""
    from .formats import serialize_detections, serialize_mask

    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    (out / "detections.txt").write_text(serialize_detections(scene.detections), encoding="utf-8")
    (out / "mask.pgm").write_bytes(serialize_mask(scene.mask))
    truth = {
        "spec": scene.spec.to_dict(),
        "truth_depth_m": scene.truth_depth_m,
        "waterline_row": scene.waterline_row,
        "truth_ladder": scene.truth_ladder.to_dict(),
        "emitted_indices": list(scene.emitted_indices),
        "recoverable": scene.recoverable,
    }
    (out / "truth.json").write_text(json.dumps(truth, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return out
