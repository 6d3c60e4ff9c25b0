import math
import warnings
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, strategies as st

from circdist.distortion import Schedule, var_log_deriv_iterate
from circdist.errors import BreakpointQueryError, ConstructionError, ResourceLimitError, UncertifiedHorizonWarning
from circdist.pa import (
    PAMap, as_fraction, balanced_map, balance_predicate, pa_class_sum, pa_complete_jump, pa_compose,
    pa_inverse, pa_iterate, pa_jump, pa_orbit_classes, pa_var_sequence, two_interval_map,
)

from conftest import pa_maps

PTS = [F(k, 97) for k in range(97)]


def test_construction_checks():
    with pytest.raises(ConstructionError):
        PAMap([0, F(1, 2)], [2, 1], 0)  # 2 * 1/2 + 1 * 1/2 != 1
    with pytest.raises(ConstructionError):
        PAMap([0, 0], [1, 1], 0)
    with pytest.raises(ConstructionError):
        PAMap([0, F(1, 2)], [F(3, 2), F(-1, 2)], 0)
    with pytest.raises(TypeError):
        as_fraction(0.5)


def test_two_interval_map_values():
    f = two_interval_map()
    assert f.apply_exact(F(0)) == F(2, 11)
    assert f.apply_exact(F(1, 3)) == F(2, 11) + F(2, 3)
    assert f.slope_right(F(1, 6)) == 2
    assert f.slope_right(F(1, 2)) == F(1, 2)
    assert pa_jump(f, 0) == 4
    assert pa_jump(f, F(1, 3)) == F(1, 4)
    assert f.var_log_deriv() == pytest.approx(4 * math.log(2))


def test_float_derivative_at_break_point_raises():
    f = two_interval_map()
    with pytest.raises(BreakpointQueryError) as info:
        f.deriv(np.array([0.2, 1 / 3]))
    assert info.value.right == F(1, 2) and info.value.left == 2


def test_rotation_is_not_canonicalised_away():
    r = PAMap.rotation(F(1, 5))
    assert r.apply_exact(F(9, 10)) == F(1, 10)
    assert r.var_log_deriv() == 0


@given(pa_maps(), pa_maps(), pa_maps())
def test_composition_associative(f, g, h):
    assert pa_compose(pa_compose(f, g), h) == pa_compose(f, pa_compose(g, h))


@given(pa_maps(), pa_maps())
def test_composition_pointwise(f, g):
    # lifts are anchored by F(0) in [0, 1), so compare on the circle
    fg = pa_compose(f, g)
    for x in PTS[::7]:
        assert fg.apply_exact(x) == f.apply_exact(g.apply_exact(x))
        assert 0 <= fg.lift_exact(0) < 1


@given(pa_maps())
def test_inverse_exact(f):
    inv = pa_inverse(f)
    assert pa_compose(f, inv) == PAMap.identity()
    assert pa_compose(inv, f) == PAMap.identity()
    for x in PTS[::5]:
        assert inv.apply_exact(f.apply_exact(x)) == x


@given(pa_maps())
def test_exact_and_float_paths_agree(f):
    x = np.linspace(0.001, 0.999, 101)
    exact = [float(f.lift_exact(F(v))) for v in x]
    assert np.allclose(f.lift(x), exact, atol=1e-12)


@given(pa_maps(), st.integers(2, 6))
def test_var_subadditive_exact(f, n):
    seq = pa_var_sequence(f, 2 * n)
    assert seq.subadditivity_violations(slack=1e-12) == []


@given(pa_maps())
def test_class_sum_lower_bound(f):
    """For these small examples the limit is at least the orbit-class sum of |log C|."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UncertifiedHorizonWarning)
        total, certified = pa_class_sum(f, 60)
    seq = pa_var_sequence(f, 12, cap=5000)
    if certified:
        assert seq.fekete_estimate >= total - 1e-9


def test_class_sum_equals_limit_for_two_interval_map():
    f = two_interval_map()
    total, certified = pa_class_sum(f, 200)
    assert certified
    assert total == pytest.approx(4 * math.log(2))
    seq = pa_var_sequence(f, 60)
    assert seq.per_n[-1] == pytest.approx(4 * math.log(2), rel=1e-12)


def test_complete_jump_and_certification():
    f = two_interval_map()
    rep = pa_complete_jump(f, 0, 200)
    assert rep.certified and rep.complete_jump == 4
    # f(0) = 1/5 makes 0 periodic, so every window sees break points near its edge
    g = two_interval_map(F(1, 5))
    rep = pa_complete_jump(g, 0, 40)
    assert not rep.certified
    with pytest.warns(UncertifiedHorizonWarning):
        balance_predicate(g, 40)


def test_balanced_map():
    f = balanced_map()
    rep = balance_predicate(f, 100)
    assert rep.balanced and rep.certified
    assert len(pa_orbit_classes(f, 100)) == 1
    seq = pa_var_sequence(f, 200)
    assert np.max(seq.var_values) <= 2 * math.log(3) + 1e-12


def test_iterate_cap():
    with pytest.raises(ResourceLimitError):
        pa_iterate(two_interval_map(), 40, cap=20)


def test_iterate_matches_repeated_composition():
    f = two_interval_map()
    f3 = pa_iterate(f, 3)
    assert f3 == pa_compose(f, pa_compose(f, f))


def test_partition_var_of_float_path():
    f = two_interval_map()
    exact = pa_var_sequence(f, 5).var_values
    for n in (1, 3, 5):
        est = var_log_deriv_iterate(f, n, Schedule(12, 14, 1e-12))
        assert est.value == pytest.approx(exact[n - 1], abs=1e-12)


def test_json_round_trip():
    f = two_interval_map()
    assert PAMap.from_json(f.to_json()) == f
    with pytest.raises(ConstructionError):
        PAMap.from_pieces([{"breakpoint": "0", "value": "0", "slope": "2"},
                           {"breakpoint": "1/3", "value": "1/3", "slope": "1/2"}])
