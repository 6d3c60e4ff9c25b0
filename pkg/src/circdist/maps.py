"""Orientation-preserving maps of the circle R/Z and of the interval [0, 1].

Every map exposes the same calculus, vectorised over numpy arrays:

* ``lift(x)``        value of a degree-one lift (circle) or the value itself (interval)
* ``f(x)``           value reduced to [0, 1) on the circle
* ``deriv(x)``       Df(x) > 0
* ``affine_deriv(x)``  D^2 f / Df
* ``invert(y)``      lift of the inverse, evaluated by monotone root finding

Compositions and inverses are kept as expression trees (``Compose``,
``Inverse``) and evaluated structurally; the chain rule and the cocycle
relation for the affine derivative are applied node by node.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConstructionError, NumericFailure, UnsupportedVariantError

TWO_PI = 2.0 * np.pi
GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def wrap(x):
    """Reduce to the canonical representative in [0, 1)."""
    x = np.asarray(x, dtype=float)
    r = x - np.floor(x)
    # x - floor(x) rounds up to 1.0 for tiny negative x
    r = np.where(r >= 1.0, 0.0, r)
    return r if r.ndim else float(r)


def circle_distance(x, y):
    """Distance between points of R/Z."""
    d = wrap(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))
    return np.minimum(d, 1.0 - d)


def solve_increasing(func, dfunc, y, lo, hi, tol=1e-15, maxiter=200):
    """Solve ``func(x) = y`` for an increasing ``func`` with root in [lo, hi].

    Newton steps that leave the current bracket are replaced by bisection, and
    the bracket is tightened at every iterate, so the iteration cannot escape.
    Works elementwise on arrays.
    """
    y = np.asarray(y, dtype=float)
    lo = np.array(np.broadcast_to(lo, y.shape), dtype=float)
    hi = np.array(np.broadcast_to(hi, y.shape), dtype=float)
    x = 0.5 * (lo + hi)
    eps = np.finfo(float).eps
    for _ in range(maxiter):
        fx = func(x) - y
        lo = np.where(fx < 0, x, lo)
        hi = np.where(fx > 0, x, hi)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = fx / dfunc(x)
        tiny = 4 * eps * np.maximum(1.0, np.abs(x))
        small = (np.abs(step) <= tiny) | (fx == 0)
        xn = x - step
        outside = ~((xn > lo) & (xn < hi)) & ~small
        xn = np.where(outside, 0.5 * (lo + hi), xn)
        xn = np.where(fx == 0, x, xn)
        done = small | (hi - lo <= tiny)
        x = xn
        if np.all(done):
            return x if x.ndim else float(x)
    raise NumericFailure(
        f"root finding did not converge in {maxiter} iterations", bracket=(lo, hi)
    )


class Map1D:
    """Base class for one-dimensional orientation-preserving maps."""

    periodic = True

    def lift(self, x):
        raise NotImplementedError

    def deriv(self, x):
        raise NotImplementedError

    def affine_deriv(self, x):
        raise UnsupportedVariantError(f"{type(self).__name__} has no affine derivative")

    def log_deriv(self, x):
        """log Df, used by orbit accumulation (may use one-sided values)."""
        return np.log(self.deriv(x))

    def step(self, x):
        """``(F(x), log Df(x))`` in one call; maps with shared work override this."""
        return self.lift(x), self.log_deriv(x)

    def jet(self, x):
        """``(F(x), log Df(x), D^2 f / Df (x))`` in one call."""
        return self.lift(x), self.log_deriv(x), self.affine_deriv(x)

    def __call__(self, x):
        y = self.lift(x)
        return wrap(y) if self.periodic else y

    def invert(self, y):
        y = np.asarray(y, dtype=float)
        if self.periodic:
            # F(k) <= y < F(k + 1) for k = floor(y - F(0))
            k = np.floor(y - float(self.lift(0.0)))
            lo, hi = k, k + 1.0
        else:
            lo, hi = np.zeros_like(y), np.ones_like(y)
        return solve_increasing(self.lift, self.deriv, y, lo, hi)

    def inverse(self) -> Map1D:
        return Inverse(self)

    def __matmul__(self, other: Map1D) -> Map1D:
        return Compose(self, other)


class CircleMap(Map1D):
    periodic = True


class IntervalMap(Map1D):
    """Diffeomorphism of [0, 1] fixing both end points."""

    periodic = False


@dataclass(frozen=True, eq=False)
class Compose(Map1D):
    """``outer o inner``."""

    outer: Map1D
    inner: Map1D
    periodic: bool = field(init=False)

    def __post_init__(self):
        if self.outer.periodic != self.inner.periodic:
            raise ConstructionError("cannot compose a circle map with an interval map")
        object.__setattr__(self, "periodic", self.inner.periodic)

    def lift(self, x):
        return self.outer.lift(self.inner.lift(x))

    def deriv(self, x):
        return self.outer.deriv(self.inner.lift(x)) * self.inner.deriv(x)

    def log_deriv(self, x):
        return self.outer.log_deriv(self.inner.lift(x)) + self.inner.log_deriv(x)

    def step(self, x):
        y, a = self.inner.step(x)
        z, b = self.outer.step(y)
        return z, a + b

    def jet(self, x):
        y, l1, a1 = self.inner.jet(x)
        z, l2, a2 = self.outer.jet(y)
        return z, l1 + l2, a2 * np.exp(l1) + a1

    def affine_deriv(self, x):
        y = self.inner.lift(x)
        return self.outer.affine_deriv(y) * self.inner.deriv(x) + self.inner.affine_deriv(x)

    def invert(self, y):
        return self.inner.invert(self.outer.invert(y))


@dataclass(frozen=True, eq=False)
class Inverse(Map1D):
    base: Map1D
    periodic: bool = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "periodic", self.base.periodic)

    def lift(self, y):
        return self.base.invert(y)

    def deriv(self, y):
        return 1.0 / self.base.deriv(self.base.invert(y))

    def log_deriv(self, y):
        return -self.base.log_deriv(self.base.invert(y))

    def step(self, y):
        x = self.base.invert(y)
        return x, -self.base.log_deriv(x)

    def jet(self, y):
        x = self.base.invert(y)
        _, l, a = self.base.jet(x)
        return x, -l, -a * np.exp(-l)

    def affine_deriv(self, y):
        x = self.base.invert(y)
        return -self.base.affine_deriv(x) / self.base.deriv(x)

    def invert(self, x):
        return self.base.lift(x)

    def inverse(self):
        return self.base


@dataclass(frozen=True)
class Rotation(CircleMap):
    rho: float

    def lift(self, x):
        return np.asarray(x, dtype=float) + self.rho if np.ndim(x) else float(x) + self.rho

    def deriv(self, x):
        return np.ones_like(np.asarray(x, dtype=float)) if np.ndim(x) else 1.0

    def log_deriv(self, x):
        return np.zeros_like(np.asarray(x, dtype=float)) if np.ndim(x) else 0.0

    def affine_deriv(self, x):
        return self.log_deriv(x)

    def invert(self, y):
        return np.asarray(y, dtype=float) - self.rho if np.ndim(y) else float(y) - self.rho

    def inverse(self):
        return Rotation(-self.rho)


@dataclass(frozen=True)
class Identity(Map1D):
    periodic: bool = True

    def lift(self, x):
        return np.asarray(x, dtype=float) if np.ndim(x) else float(x)

    def deriv(self, x):
        return np.ones_like(np.asarray(x, dtype=float)) if np.ndim(x) else 1.0

    def log_deriv(self, x):
        return np.zeros_like(np.asarray(x, dtype=float)) if np.ndim(x) else 0.0

    affine_deriv = log_deriv

    def invert(self, y):
        return self.lift(y)

    def inverse(self):
        return self


@dataclass(frozen=True)
class FourierDiffeo(CircleMap):
    """Lift ``F(x) = x + c + sum_k a_k cos(2 pi k x) + b_k sin(2 pi k x)``.

    ``coefficients`` is a sequence of ``(a_k, b_k)`` pairs for k = 1, 2, ...
    Positivity of DF is checked at construction: either the crude bound
    ``sum 2 pi k (|a_k| + |b_k|) < 1`` holds, or the minimum over a 4096-point
    grid stays positive after subtracting the Lipschitz slack between nodes.
    """

    mean_shift: float
    coefficients: tuple = ()

    def __post_init__(self):
        coeffs = tuple((float(a), float(b)) for a, b in self.coefficients)
        object.__setattr__(self, "coefficients", coeffs)
        if not coeffs:
            return
        k = np.arange(1, len(coeffs) + 1)
        ab = np.abs(np.array(coeffs)).sum(axis=1)
        if np.sum(TWO_PI * k * ab) < 1.0:
            return
        grid = np.arange(4096) / 4096.0
        lipschitz = np.sum((TWO_PI * k) ** 2 * ab)
        if np.min(self.deriv(grid)) - lipschitz * 0.5 / 4096.0 <= 0.0:
            raise ConstructionError("Fourier lift is not strictly increasing")

    @property
    def _k(self):
        return np.arange(1, len(self.coefficients) + 1)

    def _terms(self, x):
        x = np.asarray(x, dtype=float)
        phase = TWO_PI * x[..., None] * self._k
        a = np.array([c[0] for c in self.coefficients])
        b = np.array([c[1] for c in self.coefficients])
        return phase, a, b

    def lift(self, x):
        x = np.asarray(x, dtype=float)
        if not self.coefficients:
            return x + self.mean_shift
        phase, a, b = self._terms(x)
        return x + self.mean_shift + np.sum(a * np.cos(phase) + b * np.sin(phase), axis=-1)

    def deriv(self, x):
        x = np.asarray(x, dtype=float)
        if not self.coefficients:
            return np.ones_like(x)
        phase, a, b = self._terms(x)
        w = TWO_PI * self._k
        return 1.0 + np.sum(w * (b * np.cos(phase) - a * np.sin(phase)), axis=-1)

    def second_deriv(self, x):
        x = np.asarray(x, dtype=float)
        if not self.coefficients:
            return np.zeros_like(x)
        phase, a, b = self._terms(x)
        w = TWO_PI * self._k
        return -np.sum(w**2 * (a * np.cos(phase) + b * np.sin(phase)), axis=-1)

    def affine_deriv(self, x):
        return self.second_deriv(x) / self.deriv(x)

    def with_shift(self, c):
        return FourierDiffeo(c, self.coefficients)


@dataclass(frozen=True)
class OrbitBuffer:
    """Forward orbit ``f^k(x0)`` for k = 0..n with accumulated ``log Df^k(x0)``.

    ``points`` and ``logD`` have shape ``(n + 1,) + shape(x0)``; ``windings``
    counts the integer part shed by each circle step so the lift can be rebuilt.
    """

    x0: np.ndarray
    points: np.ndarray
    logD: np.ndarray
    windings: np.ndarray

    @property
    def n(self):
        return self.points.shape[0] - 1

    def lifted(self):
        return self.points + np.cumsum(self.windings, axis=0)


def orbit(f: Map1D, x0, n: int) -> OrbitBuffer:
    if n < 1:
        raise ValueError("orbit length must be at least 1")
    x = np.asarray(x0, dtype=float)
    if f.periodic:
        x = np.asarray(wrap(x), dtype=float)
    points = np.empty((n + 1,) + x.shape)
    logd = np.empty_like(points)
    windings = np.zeros_like(points)
    points[0], logd[0] = x, 0.0
    for k in range(n):
        try:
            step = f.log_deriv(x)
            y = np.asarray(f.lift(x), dtype=float)
        except Exception as err:
            err.orbit_index = k
            raise
        if f.periodic:
            m = np.floor(y)
            x = y - m
            windings[k + 1] = m
        else:
            x = y
        points[k + 1] = x
        logd[k + 1] = logd[k] + step
    return OrbitBuffer(np.asarray(x0, dtype=float), points, logd, windings)


def rotation_number(f: Map1D, n: int, x0: float = 0.0):
    """Birkhoff estimate ``(F^n(x0) - x0) / n`` and the classical bound ``1/n``."""
    if n < 1:
        raise ValueError("n must be positive")
    x = float(x0)
    total = 0.0
    for _ in range(n):
        y = float(f.lift(x))
        m = np.floor(y)
        total += m
        x = y - m
    return (total + x - float(x0)) / n, 1.0 / n


def rotation_estimate(f: Map1D, n: int, starts: int = 16) -> float:
    """Average of the Birkhoff estimates from ``starts`` equally spaced base points."""
    x0 = np.arange(starts) / starts
    x = x0.copy()
    total = np.zeros(starts)
    for _ in range(n):
        y = np.asarray(f.lift(x), dtype=float)
        m = np.floor(y)
        total += m
        x = y - m
    return float(np.mean((total + x - x0) / n))


def tune_rotation_number(
    build: Callable[[float], Map1D], target: float, lo: float, hi: float,
    n: int = 2000, iters: int = 45, starts: int = 16,
):
    """Bisection on a monotone one-parameter family until its rotation number hits ``target``.

    Returns ``(parameter, map)``.  The family must have nondecreasing rotation
    number in the parameter (true for ``c -> R_c o g``).
    """
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if rotation_estimate(build(mid), n, starts) < target:
            lo = mid
        else:
            hi = mid
    c = 0.5 * (lo + hi)
    return c, build(c)


def evaluate(f: Map1D, x):
    return f(x)


def deriv(f: Map1D, x):
    return f.deriv(x)


def affine_deriv(f: Map1D, x):
    return f.affine_deriv(x)


def compose(*maps: Map1D) -> Map1D:
    """``compose(f, g, h) = f o g o h``."""
    out = maps[-1]
    for m in reversed(maps[:-1]):
        out = Compose(m, out)
    return out


def conjugate(h: Map1D, f: Map1D) -> Map1D:
    """The structural composite ``h o f o h^{-1}``."""
    return Compose(h, Compose(f, h.inverse()))
