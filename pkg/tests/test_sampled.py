import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from circdist.errors import ConstructionError
from circdist.sampled import SampledDiffeo, integrate_periodic, uniform_grid

from conftest import fourier_maps


def test_integrate_periodic_matches_closed_form():
    x = uniform_grid(256)
    f = 0.3 + np.cos(2 * np.pi * x) + 0.5 * np.sin(4 * np.pi * x)
    exact = 0.3 * x + np.sin(2 * np.pi * x) / (2 * np.pi) + 0.5 * (1 - np.cos(4 * np.pi * x)) / (4 * np.pi)
    assert np.max(np.abs(integrate_periodic(f) - exact)) < 1e-13


def test_identity():
    h = SampledDiffeo.identity(64)
    x = np.linspace(0, 3, 31)
    assert np.allclose(h.lift(x), x)
    assert np.allclose(h.affine_deriv(x), 0)


def test_rejects_bad_samples():
    x = uniform_grid(8)
    with pytest.raises(ConstructionError):
        SampledDiffeo(x * 0.5, np.ones_like(x))
    with pytest.raises(ConstructionError):
        SampledDiffeo(x, -np.ones_like(x))
    # wildly large derivative samples make the cubic overshoot
    d = np.ones_like(x)
    d[3] = 40.0
    with pytest.raises(ConstructionError):
        SampledDiffeo(x, d)
    d = np.ones_like(x)
    d[0] = 2.0
    with pytest.raises(ConstructionError):
        SampledDiffeo(x, d, periodic=True)


@given(fourier_maps(budget=0.6))
def test_sampled_reproduces_a_smooth_map(f):
    # normalise f so that it fixes 0 and is a circle diffeomorphism with h(1) = 1
    x = uniform_grid(2048)
    f0 = float(f.lift(0.0))
    vals = f.lift(x) - f0
    h = SampledDiffeo(vals, f.deriv(x), f.second_deriv(x))
    y = np.linspace(0, 1, 999)
    assert np.max(np.abs(h.lift(y) - (f.lift(y) - f0))) < 1e-9
    assert np.max(np.abs(h.invert(h.lift(y)) - y)) < 1e-10
    assert h.min_deriv() > 0


def test_from_log_derivative_round_trip():
    x = uniform_grid(1024)
    logd = 0.3 * np.sin(2 * np.pi * x)
    psi = 0.6 * np.pi * np.cos(2 * np.pi * x)
    h = SampledDiffeo.from_log_derivative(logd, psi)
    d = np.exp(logd)
    d /= np.mean(d[:-1])
    assert np.max(np.abs(h.dvalues - d)) < 1e-12
    assert np.allclose(np.log(h.dvalues[1:]) - np.log(h.dvalues[:-1]), logd[1:] - logd[:-1], atol=1e-12)


def test_json_and_csv_round_trip():
    x = uniform_grid(16)
    h = SampledDiffeo.from_log_derivative(0.2 * np.sin(2 * np.pi * x), 0.4 * np.pi * np.cos(2 * np.pi * x))
    h2 = SampledDiffeo.from_json(h.to_json())
    assert np.array_equal(h.values, h2.values)
    assert json.loads(h.to_json())["kind"] == "sampled"
    assert h.to_csv().splitlines()[0] == "x,h,Dh"


@given(st.floats(0.05, 0.3))
def test_interval_mode(a):
    x = uniform_grid(128)
    vals = x + a * x * (1 - x)
    h = SampledDiffeo(vals, 1 + a * (1 - 2 * x), -2 * a * np.ones_like(x), periodic=False)
    y = np.linspace(0, 1, 33)
    assert np.allclose(h.lift(y), y + a * y * (1 - y), atol=1e-12)
