"""Circle diffeomorphisms whose log-derivative carries a Cantor-function component.

``log Df = c (C(x) - x) + s(x) - L`` where ``C`` is the Cantor function,
``s`` a trigonometric smoothing term and ``L`` the constant making
``int Df = 1``.  The derivative is continuous and of bounded variation, and
the Stieltjes measure of ``log Df`` has a singular part of mass ``|c|``.
"""

from __future__ import annotations

import copy

import numpy as np

from .errors import ConstructionError
from .maps import GOLDEN, TWO_PI, CircleMap

_WORD = 10            # ternary digits resolved per table lookup
_WORD_SIZE = 3**_WORD


def _cantor_tables():
    words = np.arange(_WORD_SIZE)
    digits = np.empty((_WORD_SIZE, _WORD), dtype=np.int64)
    w = words.copy()
    for i in range(_WORD - 1, -1, -1):
        digits[:, i] = w % 3
        w //= 3
    value = np.zeros(_WORD_SIZE)
    stopped = np.zeros(_WORD_SIZE, dtype=bool)
    for i in range(_WORD):
        d = digits[:, i]
        live = ~stopped
        weight = 2.0 ** -(i + 1)
        value += np.where(live & (d == 2), weight, 0.0)
        value += np.where(live & (d == 1), weight, 0.0)
        stopped |= d == 1
    return value, stopped


_VALUE, _STOPPED = _cantor_tables()


def cantor_function(x, depth: int = 40):
    """Cantor function on [0, 1], resolving ``depth`` ternary digits (rounded up to a multiple of 10).

    Digits are peeled off ten at a time by table lookup; points whose
    expansion already hit a digit 1 drop out of the loop.  Arithmetic runs in
    extended precision so that 40 digits are meaningful.
    """
    x = np.asarray(x, dtype=float)
    flat = np.clip(x, 0.0, 1.0).ravel()
    y = flat * _WORD_SIZE  # exact enough in double for the first word
    w = np.minimum(np.floor(y), _WORD_SIZE - 1).astype(np.int64)
    out = _VALUE[w].astype(np.longdouble)
    idx = np.flatnonzero(~_STOPPED[w])
    rest = (y[idx] - w[idx]).astype(np.longdouble)
    scale = np.longdouble(1.0)
    for _ in range(-(-depth // _WORD) - 1):
        if idx.size == 0:
            break
        scale /= 2**_WORD
        y = rest * _WORD_SIZE
        w = np.clip(np.floor(y), 0, _WORD_SIZE - 1).astype(np.int64)
        out[idx] += scale * _VALUE[w]
        keep = ~_STOPPED[w]
        idx, rest = idx[keep], (y - w)[keep]
    out = np.where(flat >= 1.0, 1.0, out.astype(float)).reshape(x.shape)
    return out if out.ndim else float(out)


def cantor_gap_endpoints(depth: int) -> np.ndarray:
    """End points of the middle-third gaps removed in the first ``depth`` stages, sorted."""
    lefts = np.array([0.0])
    length = 1.0
    pts = []
    for _ in range(depth):
        length /= 3.0
        pts.append(lefts + length)
        pts.append(lefts + 2 * length)
        lefts = np.concatenate([lefts, lefts + 2 * length])
    return np.sort(np.concatenate(pts)) if pts else np.empty(0)


class CantorMap(CircleMap):
    """Circle diffeomorphism with ``log Df = c (C(x) - x) + s(x) - L``.

    ``smoothing`` holds ``(a_k, b_k)`` pairs for ``s(x) = sum a_k cos 2 pi k x + b_k sin 2 pi k x``.
    ``log Df`` is evaluated exactly (up to the Cantor depth); the lift is the
    integral of ``Df`` from a cumulative trapezoid table on ``grid`` cells,
    completed inside each cell by the trapezoid rule with the exact end values.
    """

    def __init__(self, c: float, smoothing=(), shift: float = GOLDEN, grid: int = 2**18, depth: int = 40):
        self.c = float(c)
        self.smoothing = tuple((float(a), float(b)) for a, b in smoothing)
        self.shift = float(shift)
        self.depth = depth
        if abs(self.c) > 20:
            raise ConstructionError("Cantor weight too large for a positive derivative in floating point")
        self.grid = grid
        x = np.linspace(0.0, 1.0, grid + 1)
        raw = self._raw_log(x)
        if not np.all(np.isfinite(raw)):
            raise ConstructionError("derivative is not finite")
        dens = np.exp(raw)
        cells = 0.5 * (dens[:-1] + dens[1:]) / grid
        cum = np.concatenate([[0.0], np.cumsum(cells)])
        self.log_norm = float(np.log(cum[-1]))
        self._x = x
        self._cum = cum / cum[-1]
        self._dens = dens / cum[-1]
        if not np.all(self._dens > 0):
            raise ConstructionError("derivative must stay positive")

    def with_shift(self, shift):
        """Same derivative, different rotation part (tables are shared)."""
        other = copy.copy(self)
        other.shift = float(shift)
        return other

    def _smooth(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for k, (a, b) in enumerate(self.smoothing, start=1):
            out += a * np.cos(TWO_PI * k * x) + b * np.sin(TWO_PI * k * x)
        return out

    def _raw_log(self, r):
        return self.c * (cantor_function(r, self.depth) - r) + self._smooth(r)

    def log_deriv(self, x):
        x = np.asarray(x, dtype=float)
        r = x - np.floor(x)
        out = self._raw_log(r) - self.log_norm
        return out if out.ndim else float(out)

    def deriv(self, x):
        return np.exp(self.log_deriv(x))

    def step(self, x):
        x = np.asarray(x, dtype=float)
        k = np.floor(x)
        r = x - k
        logd = self._raw_log(r) - self.log_norm
        j = np.minimum((r * self.grid).astype(np.int64), self.grid - 1)
        part = 0.5 * (r - self._x[j]) * (self._dens[j] + np.exp(logd))
        out = k + self.shift + self._cum[j] + part
        if out.ndim:
            return out, logd
        return float(out), float(logd)

    def lift(self, x):
        return self.step(x)[0]

    def __repr__(self):
        return f"CantorMap(c={self.c}, smoothing={self.smoothing}, shift={self.shift:.12g})"
