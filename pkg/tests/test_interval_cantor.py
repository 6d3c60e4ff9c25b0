import numpy as np
import pytest
from hypothesis import given, strategies as st

from circdist.conjugation import parabolic_patch_build, cantor_map_build
from circdist.errors import ConstructionError
from circdist.interval import BumpDiffeo, ParabolicRestriction, SmoothPatch
from circdist.maps import GOLDEN, rotation_estimate
from circdist.cantor import CantorMap, cantor_function, cantor_gap_endpoints

X = np.linspace(0, 1, 1001)


def test_parabolic_restriction_is_the_mobius_map():
    f = ParabolicRestriction(0.2)
    m = f.as_mobius()
    inner = X[1:-1]
    # the Moebius circle map has its parabolic fixed point at x = 0 (mod 1)
    assert np.allclose(np.mod(m.lift(inner), 1.0), f.lift(inner), atol=1e-12)
    assert np.allclose(m.deriv(inner), f.deriv(inner), rtol=1e-10)
    assert f.lift(0.0) == pytest.approx(0.0) and f.lift(1.0) == pytest.approx(1.0)
    assert np.all(f.lift(inner) > inner)


@given(st.floats(0.01, 1.0), st.integers(1, 20))
def test_parabolic_power(tau, n):
    f = ParabolicRestriction(tau)
    x = X[1:-1]
    y = x
    for _ in range(n):
        y = f.lift(y)
    assert np.allclose(f.power(n).lift(x), y, atol=1e-10)


def test_parabolic_affine_derivative():
    f = ParabolicRestriction(0.3)
    x = X[1:-1]
    num = (f.log_deriv(x + 1e-6) - f.log_deriv(x - 1e-6)) / 2e-6
    assert np.allclose(f.affine_deriv(x), num, atol=1e-6)
    with pytest.raises(ConstructionError):
        ParabolicRestriction(0.0)


def test_bump():
    k = BumpDiffeo(0.5, 0.1, -0.6)
    assert k.lift(0.5) == pytest.approx(0.5)
    assert k.deriv(0.5) == pytest.approx(0.4)
    assert np.allclose(k.lift(X[X < 0.39]), X[X < 0.39])
    x = np.linspace(0.41, 0.59, 101)
    num = (np.log(k.deriv(x + 1e-6)) - np.log(k.deriv(x - 1e-6))) / 2e-6
    assert np.allclose(k.affine_deriv(x), num, atol=1e-5)
    with pytest.raises(ConstructionError):
        BumpDiffeo(0.5, 0.1, 0.7)  # min beta' = -1.5, so amplitude must stay below 2/3
    with pytest.raises(ConstructionError):
        BumpDiffeo(0.05, 0.1, 0.1)


def test_parabolic_patch_build():
    ex = parabolic_patch_build()
    assert ex.delta == pytest.approx(np.log(2.5))
    assert ex.f.lift(ex.b) == pytest.approx(ex.fhat.lift(ex.b))
    assert isinstance(ex.f, SmoothPatch)
    outside = X[(X < ex.a) | (X > ex.fhat.lift(ex.a))]
    assert np.allclose(ex.f.lift(outside), ex.fhat.lift(outside))
    with pytest.raises(ConstructionError):
        parabolic_patch_build(b=0.9)
    with pytest.raises(ConstructionError):
        parabolic_patch_build(bump={"width": 0.5})
    with pytest.raises(ConstructionError):
        parabolic_patch_build(bump={"shape": 1})


def test_cantor_function():
    assert cantor_function(0.0) == 0.0 and cantor_function(1.0) == 1.0
    assert cantor_function(0.25) == pytest.approx(1 / 3, abs=1e-12)
    x = np.linspace(0, 1, 3001)
    c = cantor_function(x)
    assert np.all(np.diff(c) >= 0)
    assert np.allclose(cantor_function(x / 3), c / 2, atol=1e-12)
    assert np.allclose(cantor_function(1 - x), 1 - c, atol=1e-12)
    gaps = cantor_gap_endpoints(3)
    assert gaps.size == 2 * (1 + 2 + 4)
    # C is constant across every removed gap
    cg = cantor_function(gaps)
    assert np.allclose(cg[0::2], cg[1::2], atol=1e-12)
    assert cantor_function(1 / 3) == pytest.approx(0.5)


def test_cantor_map():
    f = CantorMap(0.5, ((0.0, 0.1),), shift=0.0, grid=2**14)
    x = np.linspace(0, 1, 2001)
    assert f.lift(1.0) - f.lift(0.0) == pytest.approx(1.0, abs=1e-12)
    assert np.all(np.diff(f.lift(x)) > 0)
    assert np.max(np.abs(f.invert(f.lift(x)) - x)) < 1e-10
    with pytest.raises(ConstructionError):
        CantorMap(50.0)


def test_cantor_map_rotation_tuned():
    f = cantor_map_build(0.5, grid=2**14)
    assert abs(rotation_estimate(f, 4000) - GOLDEN) < 1e-3
