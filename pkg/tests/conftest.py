from fractions import Fraction

import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from circdist.maps import FourierDiffeo
from circdist.pa import PAMap

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@st.composite
def fourier_maps(draw, modes=3, budget=0.9):
    """Fourier lifts with sum 2 pi k (|a_k| + |b_k|) <= budget, so Df >= 1 - budget."""
    k = np.arange(1, modes + 1)
    raw = draw(st.lists(st.floats(-1, 1), min_size=2 * modes, max_size=2 * modes))
    raw = np.array(raw).reshape(modes, 2)
    weight = np.sum(2 * np.pi * k * np.abs(raw).sum(axis=1))
    scale = draw(st.floats(0, budget))
    if weight > 0:
        raw = raw * scale / weight
    shift = draw(st.floats(0, 1))
    return FourierDiffeo(shift, tuple(map(tuple, raw.tolist())))


@st.composite
def pa_maps(draw, max_cells=4, max_den=12):
    """Random PA circle maps with rational break points, slopes and f(0)."""
    m = draw(st.integers(1, max_cells))
    cuts = sorted(set(draw(st.lists(st.fractions(0, 1, max_denominator=max_den), min_size=m, max_size=m))))
    cuts = [c for c in cuts if 0 < c < 1]
    bps = [Fraction(0)] + cuts
    lengths = [b - a for a, b in zip(bps, bps[1:] + [Fraction(1)])]
    raw = [Fraction(draw(st.integers(1, 6)), draw(st.integers(1, 6))) for _ in bps]
    total = sum(s * l for s, l in zip(raw, lengths))
    slopes = [s / total for s in raw]
    value = draw(st.fractions(0, 1, max_denominator=max_den))
    return PAMap(bps, slopes, value)
