import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from circdist.distortion import Schedule, asymptotic_distortion, limit_estimate, stability_check, total_variation_log_deriv, var_log_deriv_iterate
from circdist.errors import ConstructionError
from circdist.mobius import (
    MobiusMap, classify, hyperbolic_distance, mobius_asymptotic_distortion, var_log_deriv_closed,
    var_log_deriv_power,
)

disk_points = st.tuples(st.floats(0, 0.95), st.floats(0, 2 * np.pi)).map(lambda t: t[0] * np.exp(1j * t[1]))


def test_normalisation_and_errors():
    with pytest.raises(ConstructionError):
        MobiusMap([[0, 1], [1, 0]])
    m = MobiusMap([[4, 0], [0, 1]])
    assert np.linalg.det(m.matrix) == pytest.approx(1)


def test_classification():
    assert classify(MobiusMap([[2, 0], [0, 0.5]])).kind == "hyperbolic"
    assert classify(MobiusMap([[2, 0], [0, 0.5]])).translation_length == pytest.approx(2 * math.log(2))
    assert classify(MobiusMap([[1, 1], [0, 1]])).kind == "parabolic"
    assert classify(MobiusMap.rotation(1.0)).kind == "elliptic"
    assert classify(MobiusMap(np.eye(2))).trivial
    with pytest.raises(ValueError):
        classify(MobiusMap(np.eye(2)), tol=0)


def test_hyperbolic_distance():
    assert hyperbolic_distance(0, 0.5) == pytest.approx(math.log(3))
    with pytest.raises(ValueError):
        hyperbolic_distance(0, 1.0)


@given(disk_points, st.floats(0, 2 * np.pi))
def test_disk_form_round_trip(a, alpha):
    m = MobiusMap.from_disk(a, alpha)
    assert abs(m.a - a) < 1e-9
    assert abs(m.image_of_origin() - (-np.exp(1j * alpha) * a)) < 1e-9


@given(disk_points, st.floats(0, 2 * np.pi))
def test_derivative_formula(a, alpha):
    m = MobiusMap.from_disk(a, alpha)
    x = np.linspace(0, 1, 64, endpoint=False)
    w = np.exp(2j * np.pi * x)
    img = np.exp(1j * alpha) * (w - a) / (1 - np.conj(a) * w)
    assert np.allclose(np.exp(2j * np.pi * m.lift(x)), img, atol=1e-10)
    num = (m.lift(x + 1e-7) - m.lift(x - 1e-7)) / 2e-7
    assert np.allclose(m.deriv(x), num, rtol=1e-5)


@pytest.mark.parametrize("r", [0.1, 0.5, 0.9])
def test_closed_form_against_partition(r):
    m = MobiusMap.from_disk(r * np.exp(0.7j), 0.3)
    est = total_variation_log_deriv(m, Schedule(10, 20, 1e-10))
    assert est.converged
    assert est.value == pytest.approx(var_log_deriv_closed(m), rel=1e-8)


@given(disk_points, disk_points)
def test_conjugation_invariance_of_limit(a, b):
    f = MobiusMap.from_disk(a, 1.3)
    h = MobiusMap.from_disk(b, 0.2)
    g = h @ f @ h.inverse()
    assert mobius_asymptotic_distortion(g) == pytest.approx(mobius_asymptotic_distortion(f), abs=1e-6)


def test_power_closed_form_matches_partition():
    m = MobiusMap([[1.3, 0.4], [0.2, 1.0]])
    for n in (1, 2, 4):
        est = var_log_deriv_iterate(m, n, Schedule(10, 20, 1e-10))
        assert est.value == pytest.approx(var_log_deriv_power(m, n), rel=1e-6)


def test_parabolic_growth_is_logarithmic():
    m = MobiusMap([[1, 1], [0, 1]])
    for n in (1, 10, 500):
        assert var_log_deriv_power(m, n) == pytest.approx(8 * math.asinh(n / 2), rel=1e-9)
    assert mobius_asymptotic_distortion(m) == 0.0


@given(st.floats(0.1, 2.0))
def test_parabolic_conjugacy_class_shrinks(t):
    # z -> z + t is conjugate to z -> z + t/s^2 by scaling, so its conjugacy class reaches distortion 0
    m = MobiusMap([[1, t], [0, 1]])
    vals = [var_log_deriv_closed(MobiusMap(np.diag([1 / s, s]) @ m.matrix @ np.diag([s, 1 / s]))) for s in (1, 4, 16)]
    assert vals[0] > vals[1] > vals[2]


def test_hyperbolic_limit_and_large_powers():
    m = MobiusMap([[2, 0], [0, 0.5]])
    assert mobius_asymptotic_distortion(m) == pytest.approx(8 * math.log(2))
    big = var_log_deriv_power(m, 5000)
    assert np.isfinite(big) and big / 5000 == pytest.approx(8 * math.log(2), rel=1e-3)


@pytest.mark.parametrize("k", [2, 3, 5])
def test_distortion_scales_with_power(k):
    m = MobiusMap([[1.5, 0.3], [0.1, 0.8]])
    rep = stability_check(m, k)
    assert rep.consistent
    assert rep.dist_fk == pytest.approx(k * rep.dist_f, rel=1e-9)


def test_series_source():
    s = asymptotic_distortion(MobiusMap([[2, 0], [0, 0.5]]), 50)
    assert s.source == "closed_mobius"
    assert limit_estimate(MobiusMap.rotation(0.4)) == 0.0
