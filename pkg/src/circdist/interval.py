"""Diffeomorphisms of [0, 1]: a parabolic Moebius restriction and bump modifications."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConstructionError
from .maps import IntervalMap
from .mobius import MobiusMap


def _out(a):
    return a if np.ndim(a) else float(a)


@dataclass(frozen=True)
class ParabolicRestriction(IntervalMap):
    """``z -> z + tau`` on the boundary line, read on the circle cut at its fixed point.

    In the coordinate ``u = pi (x - 1/2)`` the real line point is ``tan u`` and
    ``f(x) = 1/2 + arctan(tan u + tau) / pi``.  Both end points are parabolic
    fixed points with derivative 1, and ``f(x) > x`` inside for ``tau > 0``.
    """

    tau: float

    def __post_init__(self):
        if not self.tau > 0:
            raise ConstructionError("tau must be positive so that f(x) > x inside")

    def _u(self, x):
        return np.pi * (np.asarray(x, dtype=float) - 0.5)

    def lift(self, x):
        u = self._u(x)
        v = np.arctan2(np.sin(u) + self.tau * np.cos(u), np.cos(u))
        return _out(0.5 + v / np.pi)

    def _q(self, u):
        return 1.0 + self.tau * np.sin(2 * u) + self.tau**2 * np.cos(u) ** 2

    def deriv(self, x):
        return _out(1.0 / self._q(self._u(x)))

    def log_deriv(self, x):
        return _out(-np.log(self._q(self._u(x))))

    def affine_deriv(self, x):
        u = self._u(x)
        dq = 2 * self.tau * np.cos(2 * u) - self.tau**2 * np.sin(2 * u)
        return _out(-np.pi * dq / self._q(u))

    def invert(self, y):
        u = self._u(y)
        v = np.arctan2(np.sin(u) - self.tau * np.cos(u), np.cos(u))
        return _out(0.5 + v / np.pi)

    def power(self, n: int):
        return ParabolicRestriction(n * self.tau)

    def as_mobius(self) -> MobiusMap:
        """The circle map this is cut from (fixed point at x = 0)."""
        return MobiusMap([[1.0, self.tau], [0.0, 1.0]])


def _beta_parts(s):
    """``beta(s) = s exp(1 - 1/(1 - s^2))`` on |s| < 1 with first and second derivatives."""
    s = np.asarray(s, dtype=float)
    inside = np.abs(s) < 1.0
    si = np.where(inside, s, 0.0)
    w = 1.0 - si * si
    E = 1.0 - 1.0 / w
    E1 = -2.0 * si / w**2
    E2 = -2.0 / w**2 - 8.0 * si * si / w**3
    ex = np.exp(E)
    b0 = si * ex
    b1 = ex * (1.0 + si * E1)
    b2 = ex * (E1 * (1.0 + si * E1) + E1 + si * E2)
    z = np.zeros_like(s)
    return np.where(inside, b0, z), np.where(inside, b1, z), np.where(inside, b2, z)


@dataclass(frozen=True)
class BumpDiffeo(IntervalMap):
    """``k(x) = x + amplitude * width * beta((x - center) / width)``.

    Smooth, equal to the identity off ``(center - width, center + width)``,
    fixes ``center`` and has ``Dk(center) = 1 + amplitude``.
    """

    center: float
    width: float
    amplitude: float

    def __post_init__(self):
        if not (self.width > 0 and 0 < self.center - self.width and self.center + self.width < 1):
            raise ConstructionError("bump support must lie inside (0, 1)")
        s = np.linspace(-1, 1, 20001)
        _, b1, b2 = _beta_parts(s)
        # slack covers the variation of beta' between samples
        slack = np.max(np.abs(b2)) * (s[1] - s[0])
        if np.min(1.0 + self.amplitude * b1) - abs(self.amplitude) * slack <= 0:
            raise ConstructionError("bump amplitude makes the derivative non-positive")

    def _s(self, x):
        return (np.asarray(x, dtype=float) - self.center) / self.width

    def lift(self, x):
        b0, _, _ = _beta_parts(self._s(x))
        return _out(np.asarray(x, dtype=float) + self.amplitude * self.width * b0)

    def deriv(self, x):
        _, b1, _ = _beta_parts(self._s(x))
        return _out(1.0 + self.amplitude * b1)

    def affine_deriv(self, x):
        _, b1, b2 = _beta_parts(self._s(x))
        return _out(self.amplitude * b2 / self.width / (1.0 + self.amplitude * b1))


@dataclass(frozen=True)
class SmoothPatch(IntervalMap):
    """``base o bump``: agrees with ``base`` off the bump support."""

    base: IntervalMap
    bump: BumpDiffeo

    def lift(self, x):
        return self.base.lift(self.bump.lift(x))

    def deriv(self, x):
        return _out(self.base.deriv(self.bump.lift(x)) * self.bump.deriv(x))

    def log_deriv(self, x):
        return _out(self.base.log_deriv(self.bump.lift(x)) + np.log(self.bump.deriv(x)))

    def affine_deriv(self, x):
        y = self.bump.lift(x)
        return _out(self.base.affine_deriv(y) * self.bump.deriv(x) + self.bump.affine_deriv(x))

    def invert(self, y):
        return self.bump.invert(self.base.invert(y))
