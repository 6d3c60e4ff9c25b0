"""Moebius transformations acting on the boundary circle of the hyperbolic plane.

A matrix ``M = [[a, b], [c, d]]`` with positive determinant acts on the upper
half plane by ``z -> (a z + b) / (c z + d)``.  The Cayley transform
``C(z) = (z - i) / (z + i)`` carries the upper half plane to the unit disk and
``i`` to ``0``; conjugating gives the disk form

    C M C^{-1} = [[p, q], [conj(q), conj(p)]],   |p|^2 - |q|^2 = 1,

i.e. ``w -> e^{i alpha} (w - a) / (1 - conj(a) w)`` with ``a = -q/p`` and
``e^{i alpha} = p / conj(p)``.  The boundary point ``e^{2 pi i x}`` is
identified with ``x`` in R/Z.  With ``a = r e^{i xi}`` the derivative of the
circle action is ``(1 - r^2) / (1 - 2 r cos(theta - xi) + r^2)``, which is
largest at ``theta = xi`` and smallest at ``theta = xi + pi``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ConstructionError
from .maps import TWO_PI, CircleMap

_CAYLEY = np.array([[1.0, -1.0j], [1.0, 1.0j]])
_CAYLEY_INV = np.array([[1.0j, 1.0j], [-1.0, 1.0]]) / 2.0j


def _normalize(m):
    m = np.asarray(m, dtype=float)
    if m.shape != (2, 2) or not np.all(np.isfinite(m)):
        raise ConstructionError("Moebius matrix must be a finite 2x2 real array")
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    if not det > 0:
        raise ConstructionError("Moebius matrix needs positive determinant (orientation preserving)")
    return m / np.sqrt(det)


def _acosh_half_sq(norm_sq, log_scale=0.0):
    """``arccosh(norm_sq * e^{2 log_scale} / 2)`` without overflow."""
    t = np.log(norm_sq) + 2.0 * log_scale
    if t > 40.0:
        # arccosh(y) = log(2y) + O(y^-2)
        return float(t)
    return float(np.arccosh(max(1.0, np.exp(t) / 2.0)))


@dataclass(frozen=True)
class MobiusClass:
    kind: str  # "elliptic", "parabolic" or "hyperbolic"
    translation_length: float = 0.0
    multiplier: float = 1.0
    trivial: bool = False


class MobiusMap(CircleMap):
    """Orientation-preserving Moebius transformation as a circle diffeomorphism."""

    def __init__(self, matrix):
        self.matrix = _normalize(matrix)
        self.matrix.setflags(write=False)
        disk = _CAYLEY @ self.matrix @ _CAYLEY_INV
        p, q = disk[0, 0], disk[0, 1]
        self.p, self.q = complex(p), complex(q)
        self.a = -self.q / self.p
        self.alpha = float(2.0 * np.angle(self.p))
        self.r = abs(self.a)
        self.xi = float(np.angle(self.a)) if self.r > 0 else 0.0
        if not self.r < 1.0:
            raise ConstructionError("disk form has |a| >= 1 (matrix too far from the identity in floats)")

    # -- constructors -------------------------------------------------------
    @classmethod
    def rotation(cls, angle):
        """Elliptic element fixing ``i``; rotates the boundary circle by ``angle`` radians."""
        t = angle / 2.0
        return cls([[np.cos(t), np.sin(t)], [-np.sin(t), np.cos(t)]])

    @classmethod
    def from_disk(cls, a, alpha=0.0):
        """Map ``w -> e^{i alpha}(w - a)/(1 - conj(a) w)``."""
        a = complex(a)
        if abs(a) >= 1:
            raise ConstructionError("|a| must be < 1")
        s = 1.0 / np.sqrt(1.0 - abs(a) ** 2)
        p = s * np.exp(0.5j * alpha)
        q = -a * p
        disk = np.array([[p, q], [np.conj(q), np.conj(p)]])
        m = _CAYLEY_INV @ disk @ _CAYLEY
        return cls(np.real(m))

    @property
    def trace(self):
        return float(self.matrix[0, 0] + self.matrix[1, 1])

    # -- circle action --------------------------------------------------------
    def _theta(self, x):
        return TWO_PI * np.asarray(x, dtype=float)

    def lift(self, x):
        x = np.asarray(x, dtype=float)
        z = 1.0 - np.conj(self.a) * np.exp(1j * TWO_PI * x)
        out = x + (self.alpha - 2.0 * np.angle(z)) / TWO_PI
        return out if out.ndim else float(out)

    def _q(self, x):
        return 1.0 - 2.0 * self.r * np.cos(self._theta(x) - self.xi) + self.r**2

    def deriv(self, x):
        out = (1.0 - self.r**2) / self._q(x)
        return out if np.ndim(out) else float(out)

    def log_deriv(self, x):
        out = np.log1p(-self.r**2) - np.log(self._q(x))
        return out if np.ndim(out) else float(out)

    def affine_deriv(self, x):
        out = -2.0 * TWO_PI * self.r * np.sin(self._theta(x) - self.xi) / self._q(x)
        return out if np.ndim(out) else float(out)

    def boundary_deriv_norm(self, theta):
        """Derivative of the circle action at the boundary point ``e^{i theta}``."""
        return self.deriv(np.asarray(theta, dtype=float) / TWO_PI)

    def invert(self, y):
        inv = self.inverse()
        y = np.asarray(y, dtype=float)
        x = np.asarray(inv.lift(y))
        out = x - np.round(np.asarray(self.lift(x)) - y)
        return out if out.ndim else float(out)

    def inverse(self):
        m = self.matrix
        return MobiusMap([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]])

    def __matmul__(self, other):
        if isinstance(other, MobiusMap):
            return MobiusMap(self.matrix @ other.matrix)
        return super().__matmul__(other)

    def power(self, n: int):
        return MobiusMap(np.linalg.matrix_power(self.matrix, n))

    def scaled_power(self, n: int):
        """``M^n = e^{s} N`` with ``||N||_F = 1``; safe for large n."""
        result, s = np.eye(2), 0.0
        base, bs = self.matrix.copy(), 0.0
        while n:
            if n & 1:
                result = result @ base
                s += bs
                nrm = np.linalg.norm(result)
                result, s = result / nrm, s + np.log(nrm)
            n >>= 1
            if n:
                base = base @ base
                bs *= 2
                nrm = np.linalg.norm(base)
                base, bs = base / nrm, bs + np.log(nrm)
        return result, s

    # -- hyperbolic geometry ----------------------------------------------------
    def image_of_origin(self) -> complex:
        """f(0) in the disk, equal to ``q / conj(p)``."""
        return self.q / np.conj(self.p)

    def orbit_distance(self, n: int = 1) -> float:
        """``dist_h(0, f^n(0))``, computed as ``arccosh(||M^n||_F^2 / 2)``."""
        nmat, s = self.scaled_power(n)
        return _acosh_half_sq(float(np.sum(nmat**2)), s)

    def var_log_deriv_closed(self) -> float:
        return var_log_deriv_closed(self)

    def classify(self, tol=1e-9) -> MobiusClass:
        return classify(self, tol)

    def to_json(self) -> str:
        return json.dumps({"kind": "mobius", "matrix": self.matrix.tolist()})

    def __repr__(self):
        return f"MobiusMap({self.matrix.tolist()})"


def classify(m: MobiusMap, tol: float = 1e-9) -> MobiusClass:
    if tol <= 0:
        raise ValueError("tol must be positive")
    if np.allclose(m.matrix, np.eye(2), atol=tol) or np.allclose(m.matrix, -np.eye(2), atol=tol):
        return MobiusClass("elliptic", trivial=True)
    t = abs(m.trace)
    if abs(t - 2.0) <= tol:
        return MobiusClass("parabolic")
    if t < 2.0:
        return MobiusClass("elliptic")
    lam = (t + np.sqrt(t * t - 4.0)) / 2.0
    return MobiusClass("hyperbolic", translation_length=float(2.0 * np.log(lam)), multiplier=float(lam))


def hyperbolic_distance(z, w) -> float:
    """Poincare-disk distance normalised so that ``dist(0, r) = log((1 + r)/(1 - r))``."""
    z, w = complex(z), complex(w)
    if abs(z) >= 1 or abs(w) >= 1:
        raise ValueError("points must lie in the open unit disk")
    t = abs(z - w) / abs(1 - np.conj(z) * w)
    return float(2.0 * np.arctanh(min(t, 1.0)))


def var_log_deriv_closed(m: MobiusMap) -> float:
    """``var(log Df) = 4 log((1 + r)/(1 - r))`` with ``r = |f(0)|``."""
    return float(8.0 * np.arctanh(m.r))


def var_log_deriv_power(m: MobiusMap, n: int) -> float:
    """``var(log Df^n) = 4 dist_h(0, f^n(0))``, overflow-safe for large n."""
    return 4.0 * m.orbit_distance(n)


def mobius_asymptotic_distortion(m: MobiusMap, tol: float = 1e-9) -> float:
    c = classify(m, tol)
    return 4.0 * c.translation_length if c.kind == "hyperbolic" else 0.0
