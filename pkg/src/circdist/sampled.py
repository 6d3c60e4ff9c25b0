"""Grid-sampled monotone diffeomorphisms with cubic Hermite interpolation."""

from __future__ import annotations

import csv
import io
import json

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .errors import ConstructionError
from .maps import CircleMap, solve_increasing


def uniform_grid(size: int) -> np.ndarray:
    """``size + 1`` equally spaced nodes on [0, 1], both ends included."""
    return np.linspace(0.0, 1.0, size + 1)


def integrate_periodic(samples: np.ndarray) -> np.ndarray:
    """Antiderivative from 0 of a smooth periodic function sampled on a closed grid.

    ``samples`` has N + 1 entries with ``samples[0] == samples[-1]``.  The
    periodic part is integrated spectrally; the mean contributes a linear term.
    """
    v = np.asarray(samples, dtype=float)[:-1]
    n = v.size
    coef = np.fft.rfft(v) / n
    mean = coef[0].real
    k = np.arange(coef.size)
    integ = np.zeros_like(coef)
    integ[1:] = coef[1:] / (2j * np.pi * k[1:])
    if n % 2 == 0:
        # the Nyquist mode has no well-defined antiderivative on the grid
        integ[-1] = 0.0
    x = np.arange(n + 1) / n
    periodic = np.fft.irfft(integ * n, n)
    periodic = np.append(periodic, periodic[0])
    return mean * x + periodic - periodic[0]


def _check_monotone(x, y, d):
    """Reject Hermite data whose cubic interpolant is not strictly increasing."""
    if np.any(np.diff(y) <= 0) or np.any(d <= 0):
        raise ConstructionError("sampled diffeomorphism needs increasing values and positive derivatives")
    h = np.diff(x)
    delta = np.diff(y) / h
    a = d[:-1] / delta
    b = d[1:] / delta
    bad = np.flatnonzero(a * a + b * b > 9.0)
    if bad.size == 0:
        return
    # exact test on the flagged cells
    a, b = a[bad], b[bad]
    # derivative of the normalised cubic on [0, 1]: q(s) = A s^2 + B s + C
    A = 3.0 * (a + b - 2.0)
    B = 2.0 * (3.0 - 2.0 * a - b)
    C = a
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(A != 0, -B / (2.0 * A), 0.0)
    s = np.clip(s, 0.0, 1.0)
    qmin = np.minimum(A * s * s + B * s + C, np.minimum(C, A + B + C))
    if np.any(qmin <= 0):
        raise ConstructionError("cubic Hermite interpolant is not monotone on some cell")


class SampledDiffeo(CircleMap):
    """Diffeomorphism stored as samples of ``h`` and ``Dh`` on a uniform grid.

    ``h(0) = 0`` and ``h(1) = 1``.  With ``periodic=True`` the map is read as a
    circle diffeomorphism with lift ``x -> floor(x) + h(x - floor(x))``;
    otherwise as a diffeomorphism of [0, 1].  Second-derivative samples
    ``ddvalues`` are optional; without them the affine derivative comes from
    centred differences of ``log Dh``.
    """

    def __init__(self, values, dvalues, ddvalues=None, periodic=True):
        values = np.asarray(values, dtype=float).copy()
        dvalues = np.asarray(dvalues, dtype=float).copy()
        if values.shape != dvalues.shape or values.ndim != 1 or values.size < 3:
            raise ConstructionError("values and dvalues must be 1-D arrays of equal length >= 3")
        if abs(values[0]) > 1e-12 or abs(values[-1] - 1.0) > 1e-12:
            raise ConstructionError("sampled diffeomorphism must satisfy h(0) = 0 and h(1) = 1")
        values[0], values[-1] = 0.0, 1.0
        self.periodic = periodic
        self.size = values.size - 1
        self.grid = uniform_grid(self.size)
        _check_monotone(self.grid, values, dvalues)
        if periodic and abs(dvalues[0] - dvalues[-1]) > 1e-8 * max(1.0, dvalues[0]):
            raise ConstructionError("circle use needs Dh(0) = Dh(1)")
        self.values = values
        self.dvalues = dvalues
        if ddvalues is None:
            psi = self._fd_psi(np.log(dvalues))
        else:
            psi = np.asarray(ddvalues, dtype=float) / dvalues
        self.psi = psi
        for arr in (self.values, self.dvalues, self.psi):
            arr.setflags(write=False)
        self._spline = CubicHermiteSpline(self.grid, values, dvalues)
        self._dspline = self._spline.derivative()

    def _fd_psi(self, logd):
        dx = 1.0 / self.size
        out = np.empty_like(logd)
        out[1:-1] = (logd[2:] - logd[:-2]) / (2 * dx)
        if self.periodic:
            out[0] = out[-1] = (logd[1] - logd[-2]) / (2 * dx)
        else:
            out[0] = (-3 * logd[0] + 4 * logd[1] - logd[2]) / (2 * dx)
            out[-1] = (3 * logd[-1] - 4 * logd[-2] + logd[-3]) / (2 * dx)
        return out

    @classmethod
    def from_log_derivative(cls, logd, psi=None, periodic=True):
        """Build ``h`` from samples of ``log Dh`` (up to an additive constant).

        With ``psi = D log Dh`` the cumulative integral uses the Hermite-corrected
        trapezoid rule; the total is normalised so that ``h(1) = 1``.
        """
        logd = np.asarray(logd, dtype=float)
        g = np.exp(logd - np.max(logd))
        dx = 1.0 / (logd.size - 1)
        cells = 0.5 * dx * (g[:-1] + g[1:])
        if psi is not None:
            psi = np.asarray(psi, dtype=float)
            gp = g * psi
            cells = cells + dx * dx / 12.0 * (gp[:-1] - gp[1:])
        cum = np.concatenate([[0.0], np.cumsum(cells)])
        total = cum[-1]
        if not np.isfinite(total) or total <= 0:
            raise ConstructionError("derivative samples cannot be normalised")
        dd = None if psi is None else g / total * psi
        return cls(cum / total, g / total, dd, periodic=periodic)

    @classmethod
    def identity(cls, size=4096, periodic=True):
        x = uniform_grid(size)
        return cls(x, np.ones_like(x), np.zeros_like(x), periodic=periodic)

    def _split(self, x):
        x = np.asarray(x, dtype=float)
        if not self.periodic:
            return np.zeros_like(x), np.clip(x, 0.0, 1.0)
        k = np.floor(x)
        return k, x - k

    def lift(self, x):
        k, r = self._split(x)
        out = k + self._spline(r)
        return out if out.ndim else float(out)

    def deriv(self, x):
        _, r = self._split(x)
        out = self._dspline(r)
        return out if out.ndim else float(out)

    def affine_deriv(self, x):
        _, r = self._split(x)
        out = np.interp(r, self.grid, self.psi)
        return out if out.ndim else float(out)

    def invert(self, y):
        y = np.asarray(y, dtype=float)
        k, r = self._split(y)
        cell = np.clip(np.searchsorted(self.values, r, side="right") - 1, 0, self.size - 1)
        lo, hi = self.grid[cell], self.grid[cell + 1]
        x = solve_increasing(self._spline, self._dspline, r, lo, hi)
        out = k + x
        return out if out.ndim else float(out)

    def min_deriv(self):
        """Smallest derivative of the interpolant (piecewise quadratic, checked per cell)."""
        c = self._dspline.c  # shape (3, ncells), local polynomial in s = x - x_i
        dx = 1.0 / self.size
        A, B, C = c
        with np.errstate(divide="ignore", invalid="ignore"):
            s = np.where(A != 0, -B / (2 * A), 0.0)
        s = np.clip(s, 0.0, dx)
        vals = np.minimum(A * s * s + B * s + C, np.minimum(C, A * dx * dx + B * dx + C))
        return float(np.min(vals))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "h", "Dh"])
        for x, h, d in zip(self.grid, self.values, self.dvalues):
            w.writerow([format(x, ".12g"), format(h, ".12g"), format(d, ".12g")])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({
            "kind": "sampled",
            "periodic": self.periodic,
            "values": [float(v) for v in self.values],
            "dvalues": [float(v) for v in self.dvalues],
            "ddvalues": [float(v) for v in self.dvalues * self.psi],
        })

    @classmethod
    def from_json(cls, text: str):
        d = json.loads(text)
        return cls(d["values"], d["dvalues"], d.get("ddvalues"), periodic=d.get("periodic", True))

    def __repr__(self):
        kind = "circle" if self.periodic else "interval"
        return f"SampledDiffeo({kind}, grid={self.size})"
