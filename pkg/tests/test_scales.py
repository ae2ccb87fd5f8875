import math

import pytest
from hypothesis import given, settings, strategies as st

from draftread.boxes import cross_class_nms
from draftread.core import BoundingBox, CharacterDetection, ScaleLadder, ValidationError
from draftread.scales import (
    NoFreeScaleError, SpatialRules, assemble_scales, assemble_with_report, correct_scales,
    correct_with_report, phi, read_ladder, score_scales,
)
from draftread.synth import CorruptionSpec, generate, reading_of, sample_spec

from conftest import scale


def glyph(label, x, y, w=20, h=40, conf=0.9):
    return CharacterDetection(BoundingBox(x, y, w, h), label, conf)


def phi_oracle(raw, occupied, reach=20):
    """Scan every even integer in [0, 200]; keep the free one nearest raw, larger on ties."""
    best = None
    for c in range(0, 201, 2):
        if c in occupied or abs(c - raw) > reach:
            continue
        if best is None or abs(c - raw) < abs(best - raw) or (
                abs(c - raw) == abs(best - raw) and c > best):
            best = c
    return best


# --- assembly -------------------------------------------------------------

def test_assemble_m_becomes_zero():
    ladder = assemble_scales([glyph("8", 100, 50), glyph("M", 125, 50)])
    assert len(ladder) == 1
    s = ladder[0]
    assert (s.value_dm, s.x_c, s.y_c, s.char_height) == (80, 112.5, 50, 40)
    assert s.scored


def test_assemble_digit_pair():
    assert assemble_scales([glyph("2", 125, 50), glyph("8", 100, 50)]).values == (82,)


def test_lone_character_gives_empty_ladder():
    res = assemble_with_report([glyph("8", 100, 50)])
    assert len(res.ladder) == 0 and res.unpaired == 1


def test_pairing_gap_limits():
    # dx must be strictly below 2 * w of the left glyph
    assert assemble_scales([glyph("8", 100, 50), glyph("2", 140, 50)]).values == ()
    assert assemble_scales([glyph("8", 100, 50), glyph("2", 139.9, 50)]).values == (82,)
    # vertical offset must be below the smaller height
    assert assemble_scales([glyph("8", 100, 50), glyph("2", 125, 90)]).values == ()
    assert assemble_scales([glyph("8", 100, 50), glyph("2", 125, 89)]).values == (82,)


def test_m_first_is_rejected_and_each_glyph_used_once():
    assert assemble_scales([glyph("M", 100, 50), glyph("8", 125, 50)]).values == ()
    res = assemble_with_report([glyph("8", 100, 50), glyph("2", 120, 50), glyph("4", 135, 50)])
    assert res.ladder.values == (82,) and res.unpaired == 1


def test_assembled_ladder_sorted_top_down():
    dets = [glyph("7", 100, 200), glyph("8", 125, 200), glyph("8", 100, 100), glyph("M", 125, 100)]
    ladder = assemble_scales(dets)
    assert ladder.values == (80, 78)
    assert [s.y_c for s in ladder] == [100, 200]


@given(st.lists(st.tuples(st.sampled_from(sorted("0123456789M")),
                          st.floats(0, 300), st.floats(0, 300)), max_size=20))
def test_assembled_values_are_two_glyph_numbers(items):
    ladder = assemble_scales([glyph(c, x, y) for c, x, y in items])
    assert all(0 <= v < 100 for v in ladder.values)
    assert len(ladder) <= len(items) // 2


# --- scoring --------------------------------------------------------------

def test_score_examples():
    both = score_scales(ScaleLadder((scale(100, 82), scale(180, 80))))
    assert [s.scored for s in both] == [True, True]
    neither = score_scales(ScaleLadder((scale(100, 82), scale(180, 60))))
    assert [s.scored for s in neither] == [False, False]
    alone = score_scales(ScaleLadder((scale(100, 82),)))
    assert [s.scored for s in alone] == [False]


def test_score_gap_limit_is_strict():
    # 2.3 * 40 = 92
    at_limit = score_scales(ScaleLadder((scale(100, 82), scale(192, 80))))
    assert not any(s.scored for s in at_limit)
    inside = score_scales(ScaleLadder((scale(100, 82), scale(191.5, 80))))
    assert all(s.scored for s in inside)


def test_score_order_rule():
    flipped = ScaleLadder((scale(100, 80), scale(180, 82)))
    assert not any(s.scored for s in score_scales(flipped))
    loose = SpatialRules(require_order=False)
    assert all(s.scored for s in score_scales(flipped, loose))


def test_odd_readings_never_score():
    ladder = ScaleLadder((scale(100, 83), scale(180, 81)))
    assert not any(s.scored for s in score_scales(ladder, SpatialRules(require_order=False)))


@given(st.lists(st.tuples(st.floats(0, 1000), st.integers(0, 99), st.floats(5, 60)), max_size=10))
def test_scoring_keeps_geometry_and_is_idempotent(rows):
    ladder = ScaleLadder.from_unsorted(scale(y, v, h) for y, v, h in rows)
    once = score_scales(ladder)
    assert score_scales(once) == once
    for a, b in zip(ladder, once):
        assert (a.x_c, a.y_c, a.char_height, a.value_dm) == (b.x_c, b.y_c, b.char_height, b.value_dm)


def test_rules_validation():
    with pytest.raises(ValidationError):
        SpatialRules(scale_spacing_dm=0)
    with pytest.raises(ValidationError):
        SpatialRules(neighbor_gap_factor=-1)


# --- phi ------------------------------------------------------------------

@pytest.mark.parametrize("raw, occupied, expected", [
    (78.0, {80, 76}, 78),
    (78.0, {78}, 80),
    (78.9, set(), 78),
    (79.0, set(), 80),
    (-0.9, set(), 0),
    (0.0, {0}, 2),
])
def test_phi_examples(raw, occupied, expected):
    assert phi(raw, occupied) == expected
    assert phi_oracle(raw, occupied) == expected


def test_phi_without_free_candidate():
    with pytest.raises(NoFreeScaleError):
        phi(-30.0)
    with pytest.raises(NoFreeScaleError):
        phi(10.0, set(range(0, 40, 2)))
    with pytest.raises(NoFreeScaleError):
        phi(float("nan"))


@settings(max_examples=500)
@given(st.floats(-5, 120, allow_nan=False),
       st.sets(st.integers(0, 60).map(lambda k: 2 * k), max_size=25))
def test_phi_matches_oracle(raw, occupied):
    expected = phi_oracle(raw, occupied)
    if expected is None:
        with pytest.raises(NoFreeScaleError):
            phi(raw, occupied)
        return
    got = phi(raw, occupied)
    assert got == expected
    assert got % 2 == 0 and got not in occupied and got >= 0


@given(st.floats(0, 150, allow_nan=False))
def test_phi_empty_occupied_is_nearest_even(raw):
    got = phi(raw)
    assert all(abs(got - raw) <= abs(c - raw) for c in range(0, 200, 2))


# --- correction -----------------------------------------------------------

def _scored(ladder):
    return score_scales(ladder)


def test_correct_interpolates_between_references():
    ladder = ScaleLadder((scale(100, 80, scored=True), scale(200, 33, scored=False),
                          scale(300, 76, scored=True)))
    assert correct_scales(ladder).values == (80, 78, 76)


def test_correct_extrapolates_above_with_negative_offset():
    # d2 = 20 - 100 = -80 -> 80 + 80 * 4 / 200 = 81.6 -> 82
    ladder = ScaleLadder((scale(20, 11, scored=False), scale(100, 80, scored=True),
                          scale(300, 76, scored=True)))
    out = correct_scales(ladder)
    assert out.values == (82, 80, 76)
    assert all(s.scored for s in out)


def test_correct_extrapolates_below():
    ladder = ScaleLadder((scale(100, 80), scale(180, 78), scale(260, 17, scored=False)))
    assert correct_scales(ladder).values == (80, 78, 76)


def test_fully_scored_ladder_unchanged():
    ladder = _scored(ScaleLadder((scale(100, 82), scale(180, 80), scale(260, 78))))
    assert correct_scales(ladder) == ladder


def test_correction_needs_two_references():
    ladder = ScaleLadder((scale(100, 82, scored=True), scale(180, 31, scored=False),
                          scale(260, 17, scored=False)))
    res = correct_with_report(ladder)
    assert res.low_confidence and res.ladder.values == (82,)
    none = correct_with_report(ScaleLadder((scale(100, 31, scored=False), scale(180, 17, scored=False))))
    assert none.low_confidence and len(none.ladder) == 0


def test_lone_scale_passes_through_flagged():
    res = correct_with_report(_scored(ScaleLadder((scale(100, 78),))))
    assert res.low_confidence and res.ladder.values == (78,) and res.ladder[0].scored
    odd = correct_with_report(_scored(ScaleLadder((scale(100, 77),))))
    assert len(odd.ladder) == 0


def test_corrected_values_avoid_duplicates():
    # the second unscored scale also predicts ~78 but 78 is taken by then
    ladder = ScaleLadder((scale(100, 80), scale(199, 3, scored=False), scale(201, 5, scored=False),
                          scale(300, 76)))
    res = correct_with_report(ladder)
    assert res.ladder.is_corrected()
    assert res.ladder.values == (80, 78, 76)
    assert res.dropped == 1 and res.corrected == 1


def test_out_of_order_references_are_filtered():
    # references scored under the loose rule but stacked small-over-large
    loose = SpatialRules(require_order=False)
    ladder = score_scales(ScaleLadder((scale(100, 80), scale(180, 82), scale(260, 84))), loose)
    out = correct_scales(ladder, loose)
    assert out.is_corrected() and len(out) == 1


def test_synthetic_single_misread_recovered():
    spec = sample_spec(7, scale_count=(6, 6), corruption=CorruptionSpec(misread_map={2: "18"}))
    scene = generate(spec)
    assert read_ladder(cross_class_nms(scene.detections)).values == scene.truth_ladder.values


def _non_adjacent(draw_ints, m):
    picked = []
    for i in draw_ints:
        if len(picked) == m:
            break
        if all(abs(i - p) > 1 for p in picked):
            picked.append(i)
    return picked


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1), st.data())
def test_recovery_round_trip(seed, data):
    spec = sample_spec(seed)
    k = spec.scale_count
    m = data.draw(st.integers(1, math.ceil(k / 3)))
    order = data.draw(st.permutations(list(range(k))))
    idx = _non_adjacent(order, m)
    misreads = {}
    for i in idx:
        truth = reading_of(spec.values_dm[i])
        misreads[i] = data.draw(
            st.tuples(st.sampled_from("0123456789"), st.sampled_from("0123456789M"))
            .map("".join).filter(lambda r: r != truth))
    spec = sample_spec(seed, corruption=CorruptionSpec(misread_map=misreads))
    scene = generate(spec)
    res = correct_with_report(score_scales(assemble_scales(cross_class_nms(scene.detections))))
    if scene.recoverable:
        assert res.ladder.values == scene.truth_ladder.values
        assert not res.low_confidence
    else:
        assert res.low_confidence
    assert res.ladder.is_corrected()
