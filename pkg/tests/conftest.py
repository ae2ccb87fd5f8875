from pathlib import Path

import numpy as np
import pytest
from hypothesis import strategies as st

from draftread.core import BoundingBox, CharacterDetection, DraftScale

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

_ACCEPTANCE: list[tuple[str, bool, str]] = []


@st.composite
def boxes(draw, max_coord=200.0, max_size=60.0):
    x = draw(st.floats(0, max_coord, allow_nan=False))
    y = draw(st.floats(0, max_coord, allow_nan=False))
    w = draw(st.floats(0.5, max_size, allow_nan=False))
    h = draw(st.floats(0.5, max_size, allow_nan=False))
    return BoundingBox(x, y, w, h)


@st.composite
def detections(draw):
    return CharacterDetection(
        draw(boxes()),
        draw(st.sampled_from(sorted("0123456789M"))),
        draw(st.floats(0, 1, allow_nan=False)),
    )


def naive_profile(cells):
    """Column-by-column, row-by-row scan; -1 where a column has no water."""
    h, w = len(cells), len(cells[0])
    out = []
    for c in range(w):
        top = -1
        for r in range(h):
            if cells[r][c]:
                top = r
                break
        out.append(top)
    return out


def scale(y, value, h=40.0, x=100.0, scored=True):
    return DraftScale(x, y, h, value, scored)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def criterion(request):
    """Record one acceptance criterion's verdict for the terminal summary."""
    def record(label: str, passed: bool, detail: str = "") -> None:
        _ACCEPTANCE.append((label, passed, detail))
        print(f"[{'PASS' if passed else 'FAIL'}] {label} {detail}")
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label, passed, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {label} {detail}")
