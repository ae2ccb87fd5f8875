"""Scale assembly, rule scoring and correction of misread scales.

The inland draft-mark rules: scales read large at the top and small at the
bottom, adjacent scales differ by 0.2 m, and each glyph is 0.1 m tall.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import AbstractSet, Sequence

from .core import CharacterDetection, DraftScale, ScaleLadder, ValidationError

PHI_SEARCH_SPACINGS = 10


@dataclass(frozen=True, slots=True)
class SpatialRules:
    """Draft-mark layout rules.

    Parameters
    ----------
    scale_spacing_dm : int
        Value step between adjacent scales (2 dm = 0.2 m).
    char_height_m : float
        Physical glyph height in meters.
    neighbor_gap_factor : float
        A neighbor counts only if its center is closer than this many
        character heights.
    require_order : bool
        Also demand the neighbor sit on the correct side (larger value
        above). With ``False`` only the absolute difference is checked.
    """

    scale_spacing_dm: int = 2
    char_height_m: float = 0.1
    neighbor_gap_factor: float = 2.3
    require_order: bool = True

    def __post_init__(self) -> None:
        if int(self.scale_spacing_dm) != self.scale_spacing_dm or self.scale_spacing_dm <= 0:
            raise ValidationError("scale_spacing_dm must be a positive integer")
        if not (self.char_height_m > 0 and self.neighbor_gap_factor > 0):
            raise ValidationError("char_height_m and neighbor_gap_factor must be positive")


DEFAULT_RULES = SpatialRules()


class NoFreeScaleError(ValueError):
    """No unused non-negative grid value lies near the requested reading."""


@dataclass(frozen=True, slots=True)
class AssemblyResult:
    ladder: ScaleLadder
    unpaired: int


@dataclass(frozen=True, slots=True)
class CorrectionResult:
    ladder: ScaleLadder
    corrected: int = 0
    dropped: int = 0
    low_confidence: bool = False


def _glyph_value(first: str, second: str) -> int | None:
    if first == "M":
        return None
    return int(first + ("0" if second == "M" else second))


def assemble_with_report(detections: Sequence[CharacterDetection]) -> AssemblyResult:
    """Pair characters into scales, left to right, each glyph used once."""
    order = sorted(
        range(len(detections)),
        key=lambda i: (detections[i].bbox.x, detections[i].bbox.y, detections[i].class_label),
    )
    used = [False] * len(detections)
    scales = []
    for pos, i in enumerate(order):
        if used[i] or detections[i].class_label == "M":
            continue
        a = detections[i].bbox
        best = None
        for j in order[pos + 1:]:
            if used[j]:
                continue
            b = detections[j].bbox
            dx = b.x - a.x
            if dx >= 2 * a.w:
                break
            dy = abs(b.y - a.y)
            if 0 < dx and dy < min(a.h, b.h):
                key = (dx, dy)
                if best is None or key < best[0]:
                    best = (key, j)
        if best is None:
            continue
        j = best[1]
        b = detections[j].bbox
        used[i] = used[j] = True
        scales.append(DraftScale(
            x_c=(a.x + b.x) / 2,
            y_c=(a.y + b.y) / 2,
            char_height=(a.h + b.h) / 2,
            value_dm=_glyph_value(detections[i].class_label, detections[j].class_label),
            scored=True,
        ))
    return AssemblyResult(ScaleLadder.from_unsorted(scales), used.count(False))


def assemble_scales(detections: Sequence[CharacterDetection]) -> ScaleLadder:
    return assemble_with_report(detections).ladder


def _complies(upper: DraftScale, lower: DraftScale, own_height: float,
              rules: SpatialRules) -> bool:
    diff = upper.value_dm - lower.value_dm
    if rules.require_order:
        value_ok = diff == rules.scale_spacing_dm
    else:
        value_ok = abs(diff) == rules.scale_spacing_dm
    return value_ok and (lower.y_c - upper.y_c) < rules.neighbor_gap_factor * own_height


def score_scales(ladder: ScaleLadder, rules: SpatialRules = DEFAULT_RULES) -> ScaleLadder:
    """Flag each scale as scored iff an adjacent ladder neighbor obeys the rules.

    Off-grid (odd) readings are never scored.
    """
    s = ladder.scales
    out = []
    for i, scale in enumerate(s):
        h = scale.char_height
        ok = scale.is_legal and (
            (i > 0 and _complies(s[i - 1], scale, h, rules))
            or (i + 1 < len(s) and _complies(scale, s[i + 1], h, rules))
        )
        out.append(replace(scale, scored=ok))
    return ScaleLadder(tuple(out))


def phi(raw_dm: float, occupied: AbstractSet[int] = frozenset(), spacing_dm: int = 2) -> int:
    """Snap ``raw_dm`` to the nearest free multiple of ``spacing_dm``.

    Equidistant candidates resolve to the larger one. Only non-negative
    values within ten spacings of ``raw_dm`` are considered.
    """
    if not math.isfinite(raw_dm):
        raise NoFreeScaleError(f"cannot snap non-finite reading {raw_dm!r}")
    reach = PHI_SEARCH_SPACINGS * spacing_dm
    lo = max(0, math.ceil((raw_dm - reach) / spacing_dm))
    hi = math.floor((raw_dm + reach) / spacing_dm)
    best = None
    for k in range(lo, hi + 1):
        c = k * spacing_dm
        if c in occupied:
            continue
        key = (abs(c - raw_dm), -c)
        if best is None or key < best[0]:
            best = (key, c)
    if best is None:
        raise NoFreeScaleError(f"no free grid value near {raw_dm!r} dm")
    return best[1]


def _nearest_two(refs: Sequence[DraftScale], y: float) -> tuple[DraftScale, DraftScale]:
    a, b = sorted(refs, key=lambda r: (abs(r.y_c - y), r.y_c))[:2]
    return (a, b) if a.value_dm >= b.value_dm else (b, a)


def _monotone_subset(scales: Sequence[DraftScale], weights: Sequence[int]) -> list[int]:
    """Max-weight chain with strictly increasing y and strictly decreasing value."""
    n = len(scales)
    best = list(weights)
    prev = [-1] * n
    for i in range(n):
        for j in range(i):
            if (scales[j].y_c < scales[i].y_c and scales[j].value_dm > scales[i].value_dm
                    and best[j] + weights[i] > best[i]):
                best[i] = best[j] + weights[i]
                prev[i] = j
    if n == 0:
        return []
    i = max(range(n), key=lambda k: (best[k], -k))
    chain = []
    while i != -1:
        chain.append(i)
        i = prev[i]
    return chain[::-1]


def correct_with_report(ladder: ScaleLadder, rules: SpatialRules = DEFAULT_RULES) -> CorrectionResult:
    """Replace unscored scales by values predicted from the scored ones.

    Each unscored scale takes the two scored scales nearest to it
    vertically, ``L`` (larger value) and ``N``, and is assigned
    ``phi(c_L - d2 * (c_L - c_N) / d1)`` with ``d1 = y_N - y_L`` and
    ``d2 = y_i - y_L``. The signed ``d2`` extrapolates above and below the
    reference pair. Only originally scored scales serve as references;
    corrected values join the occupied set.

    A ladder with fewer than two scored scales cannot be corrected; the
    scored subset is returned with ``low_confidence`` set. A lone scale is
    passed through the same way, since no rule can be checked against it.
    """
    scales = ladder.scales
    refs = [s for s in scales if s.scored]
    if len(refs) < 2:
        if len(scales) == 1 and scales[0].is_legal:
            keep = [replace(scales[0], scored=True)]
        else:
            keep = refs
        return CorrectionResult(ScaleLadder(tuple(keep)),
                                dropped=len(scales) - len(keep), low_confidence=True)

    occupied = {s.value_dm for s in refs}
    out: list[DraftScale] = []
    weights: list[int] = []
    dropped = 0
    for s in scales:
        if s.scored:
            out.append(s)
            weights.append(len(scales) + 1)
            continue
        lead, nxt = _nearest_two(refs, s.y_c)
        d1 = nxt.y_c - lead.y_c
        if d1 == 0:
            dropped += 1
            continue
        d2 = s.y_c - lead.y_c
        raw = lead.value_dm - d2 * (lead.value_dm - nxt.value_dm) / d1
        try:
            value = phi(raw, occupied, rules.scale_spacing_dm)
        except NoFreeScaleError:
            dropped += 1
            continue
        occupied.add(value)
        out.append(replace(s, value_dm=value, scored=True))
        weights.append(1)

    chain = _monotone_subset(out, weights)
    result = ScaleLadder(tuple(out[i] for i in chain))
    result.check_corrected()
    return CorrectionResult(
        result,
        corrected=sum(weights[i] == 1 for i in chain),
        dropped=dropped + len(out) - len(chain),
    )


def correct_scales(ladder: ScaleLadder, rules: SpatialRules = DEFAULT_RULES) -> ScaleLadder:
    return correct_with_report(ladder, rules).ladder


def read_ladder(detections: Sequence[CharacterDetection],
                rules: SpatialRules = DEFAULT_RULES) -> ScaleLadder:
    """Assemble, score and correct in one call (detections already NMS-filtered)."""
    return correct_scales(score_scales(assemble_scales(detections), rules), rules)
