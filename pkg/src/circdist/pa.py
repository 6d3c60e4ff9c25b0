"""Exact piecewise-affine circle homeomorphisms over the rationals.

A ``PAMap`` is stored by its break points ``b_0 < ... < b_{m-1}`` in [0, 1),
the slope on each cell ``[b_i, b_{i+1})`` (the last cell wraps to
``b_0 + 1``) and the lift value ``F(0)`` reduced to [0, 1).  All data are
``fractions.Fraction``; logarithms are taken in floating point only when a
variation is summed.  The map also implements the float ``CircleMap``
interface so it can be fed to the generic partition estimators.
"""

from __future__ import annotations

import json
import math
import warnings
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from .errors import (
    BreakpointQueryError,
    ConstructionError,
    ResourceLimitError,
    UncertifiedHorizonWarning,
    UnsupportedVariantError,
)
from .maps import CircleMap
from .series import DistortionSeries

DEFAULT_BREAKPOINT_CAP = 200_000


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError("pass rationals as strings or Fractions, not floats")
    return Fraction(x)


def frac_log(q: Fraction) -> float:
    """log of a positive rational with arbitrarily large numerator/denominator."""
    return math.log(q.numerator) - math.log(q.denominator)


def _mod1(q: Fraction) -> Fraction:
    return q - math.floor(q)


class PAMap(CircleMap):
    """Piecewise-affine orientation-preserving circle homeomorphism."""

    def __init__(self, breakpoints, slopes, value, canonical=True):
        """``value`` is ``f(b_0)`` (or the rotation amount when there are no break points)."""
        bps = [_mod1(as_fraction(b)) for b in breakpoints]
        sl = [as_fraction(s) for s in slopes]
        if len(bps) != len(sl):
            raise ConstructionError("need one slope per break point")
        if any(s <= 0 for s in sl):
            raise ConstructionError("slopes must be positive")
        order = sorted(range(len(bps)), key=lambda i: bps[i])
        bps = [bps[i] for i in order]
        # slopes follow their break points; value refers to the first listed point
        first = breakpoints and _mod1(as_fraction(breakpoints[0]))
        sl = [sl[i] for i in order]
        if len(set(bps)) != len(bps):
            raise ConstructionError("break points must be distinct")
        value = as_fraction(value)
        if not bps:
            f0 = _mod1(value)
        else:
            lengths = [bps[i + 1] - bps[i] for i in range(len(bps) - 1)] + [bps[0] + 1 - bps[-1]]
            if sum(s * l for s, l in zip(sl, lengths)) != 1:
                raise ConstructionError("slopes times cell lengths must sum to 1")
            # lift value at b_0 from the value at the first listed point
            j = bps.index(first)
            vb0 = value - sum(s * l for s, l in zip(sl[:j], lengths[:j]))
            f0 = _mod1(vb0 - (sl[-1] * bps[0]))
        self._bps = tuple(bps)
        self._slopes = tuple(sl)
        self.f0 = f0
        if canonical:
            self._canonicalize()
        self._build_segments()

    # -- construction helpers -------------------------------------------------
    @classmethod
    def _raw(cls, bps, slopes, f0):
        obj = cls.__new__(cls)
        obj._bps = tuple(bps)
        obj._slopes = tuple(slopes)
        obj.f0 = _mod1(f0)
        obj._canonicalize()
        obj._build_segments()
        return obj

    @classmethod
    def rotation(cls, rho):
        return cls((), (), rho)

    @classmethod
    def identity(cls):
        return cls.rotation(0)

    def _canonicalize(self):
        m = len(self._bps)
        if m == 0:
            return
        keep = [i for i in range(m) if self._slopes[i] != self._slopes[i - 1]]
        if not keep:
            if self._slopes[0] != 1:
                raise ConstructionError("single-slope map must have slope 1")
            self._bps, self._slopes = (), ()
            return
        self._bps = tuple(self._bps[i] for i in keep)
        self._slopes = tuple(self._slopes[i] for i in keep)

    def _build_segments(self):
        """Cells of [0, 1] in increasing order, with lift values at their left ends."""
        if not self._bps:
            knots, seg = [Fraction(0)], [Fraction(1)]
        else:
            inner = [b for b in self._bps if b > 0]
            knots = [Fraction(0)] + inner
            # slope on [0, first inner) is the slope of the cell containing 0
            seg = [self._slopes[-1] if self._bps[0] > 0 else self._slopes[0]]
            start = 1 if self._bps[0] == 0 else 0
            seg += list(self._slopes[start:start + len(inner)])
        vals = [self.f0]
        for i in range(len(knots) - 1):
            vals.append(vals[-1] + seg[i] * (knots[i + 1] - knots[i]))
        self._knots = knots
        self._seg = seg
        self._vals = vals
        self._knots_f = np.array([float(k) for k in knots])
        self._seg_f = np.array([float(s) for s in seg])
        self._logseg_f = np.array([frac_log(s) for s in seg])
        self._vals_f = np.array([float(v) for v in vals])
        self._bps_f = np.array([float(b) for b in self._bps])

    # -- exact calculus -----------------------------------------------------
    @property
    def breakpoints(self):
        return self._bps

    @property
    def slopes(self):
        return self._slopes

    @property
    def n_breakpoints(self):
        return len(self._bps)

    def lift_exact(self, x) -> Fraction:
        x = as_fraction(x)
        k = math.floor(x)
        r = x - k
        j = bisect_right(self._knots, r) - 1
        return k + self._vals[j] + self._seg[j] * (r - self._knots[j])

    def apply_exact(self, x) -> Fraction:
        return _mod1(self.lift_exact(x))

    def preimage_exact(self, y) -> Fraction:
        """The point ``x`` with ``F(x) = y`` (lift inverse)."""
        y = as_fraction(y)
        k = math.floor(y - self.f0)
        r = y - k
        j = bisect_right(self._vals, r) - 1
        return k + self._knots[j] + (r - self._vals[j]) / self._seg[j]

    def slope_right(self, x) -> Fraction:
        r = _mod1(as_fraction(x))
        return self._seg[bisect_right(self._knots, r) - 1]

    def slope_left(self, x) -> Fraction:
        r = _mod1(as_fraction(x))
        if r == 0:
            return self._seg[-1]
        j = bisect_right(self._knots, r) - 1
        return self._seg[j - 1] if self._knots[j] == r else self._seg[j]

    def jump(self, x) -> Fraction:
        return self.slope_right(x) / self.slope_left(x)

    def is_breakpoint(self, x) -> bool:
        return _mod1(as_fraction(x)) in self._bpset

    @cached_property
    def _bpset(self):
        return frozenset(self._bps)

    def jumps(self):
        """``[(b, J_f(b))]`` over all break points."""
        return [(b, self.jump(b)) for b in self._bps]

    def var_log_deriv(self) -> float:
        """``var(log Df) = sum_b |log J_f(b)|`` (fixed summation order)."""
        return math.fsum(abs(frac_log(j)) for _, j in self.jumps())

    # -- float CircleMap interface -----------------------------------------
    def _locate(self, x):
        x = np.asarray(x, dtype=float)
        k = np.floor(x)
        r = x - k
        j = np.clip(np.searchsorted(self._knots_f, r, side="right") - 1, 0, len(self._knots_f) - 1)
        return k, r, j

    def lift(self, x):
        k, r, j = self._locate(x)
        out = k + self._vals_f[j] + self._seg_f[j] * (r - self._knots_f[j])
        return out if out.ndim else float(out)

    def log_deriv(self, x):
        """log of the right derivative (defined everywhere)."""
        _, _, j = self._locate(x)
        out = self._logseg_f[j]
        return out if np.ndim(out) else float(out)

    def deriv(self, x):
        _, r, j = self._locate(x)
        hit = np.isin(r, self._bps_f)
        if np.any(hit):
            b = float(np.atleast_1d(r)[np.flatnonzero(np.atleast_1d(hit))[0]])
            q = self._bps[int(np.flatnonzero(self._bps_f == b)[0])]
            raise BreakpointQueryError(b, float(self.slope_right(q)), float(self.slope_left(q)))
        out = self._seg_f[j]
        return out if np.ndim(out) else float(out)

    def affine_deriv(self, x):
        raise UnsupportedVariantError("piecewise-affine maps have no affine derivative")

    def invert(self, y):
        y = np.asarray(y, dtype=float)
        k = np.floor(y - float(self.f0))
        r = y - k
        j = np.clip(np.searchsorted(self._vals_f, r, side="right") - 1, 0, len(self._vals_f) - 1)
        out = k + self._knots_f[j] + (r - self._vals_f[j]) / self._seg_f[j]
        return out if out.ndim else float(out)

    def inverse(self):
        return pa_inverse(self)

    # -- comparison / serialisation -----------------------------------------
    def key(self):
        return (self._bps, self._slopes, self.f0)

    def __eq__(self, other):
        return isinstance(other, PAMap) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"PAMap({len(self._bps)} break points, f(0)={self.f0})"

    def pieces(self):
        if not self._bps:
            return [{"breakpoint": "0", "value": str(self.f0), "slope": "1"}]
        return [
            {"breakpoint": str(b), "value": str(self.apply_exact(b)), "slope": str(s)}
            for b, s in zip(self._bps, self._slopes)
        ]

    def to_json(self) -> str:
        return json.dumps(self.pieces())

    @classmethod
    def from_pieces(cls, pieces):
        if not pieces:
            raise ConstructionError("empty piece list")
        bps = [Fraction(p["breakpoint"]) for p in pieces]
        slopes = [Fraction(p["slope"]) for p in pieces]
        obj = cls(bps, slopes, Fraction(pieces[0]["value"]))
        for p in pieces:
            if obj.apply_exact(Fraction(p["breakpoint"])) != _mod1(Fraction(p["value"])):
                raise ConstructionError(f"inconsistent value at break point {p['breakpoint']}")
        return obj

    @classmethod
    def from_json(cls, text: str):
        return cls.from_pieces(json.loads(text))


def pa_compose(f: PAMap, g: PAMap) -> PAMap:
    """Exact ``f o g``."""
    cands = set(g.breakpoints)
    cands.update(_mod1(g.preimage_exact(b)) for b in f.breakpoints)
    f0 = f.lift_exact(g.lift_exact(Fraction(0)))
    if not cands:
        return PAMap._raw((), (), f0)
    pts = sorted(cands)
    slopes = [f.slope_right(g.lift_exact(c)) * g.slope_right(c) for c in pts]
    return PAMap._raw(pts, slopes, f0)


def pa_inverse(f: PAMap) -> PAMap:
    if not f.breakpoints:
        return PAMap._raw((), (), -f.f0)
    pts = sorted(f.apply_exact(b) for b in f.breakpoints)
    slopes = [1 / f.slope_right(_mod1(f.preimage_exact(p))) for p in pts]
    return PAMap._raw(pts, slopes, f.preimage_exact(Fraction(0)))


def pa_iterate(f: PAMap, n: int, cap: int = DEFAULT_BREAKPOINT_CAP) -> PAMap:
    if n < 1:
        raise ValueError("n must be at least 1")
    out = f
    for _ in range(n - 1):
        out = pa_compose(f, out)
        if out.n_breakpoints > cap:
            raise ResourceLimitError(f"break point count {out.n_breakpoints} exceeds cap {cap}")
    return out


def pa_jump(f: PAMap, x) -> Fraction:
    return f.jump(as_fraction(x))


@dataclass(frozen=True)
class JumpReport:
    point: Fraction
    jump: Fraction
    complete_jump: Fraction
    horizon_used: int
    certified: bool
    hits: tuple = field(default=())  # (orbit index, point, jump) for every break point hit


def pa_complete_jump(f: PAMap, x, horizon: int) -> JumpReport:
    """Product of ``J_f(f^k x)`` over ``|k| <= horizon``.

    Certified when the outer quarter of the window on each side hits no break point.
    """
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    x = _mod1(as_fraction(x))
    hits = []
    if f.is_breakpoint(x):
        hits.append((0, x, f.jump(x)))
    fwd, bwd = x, x
    for k in range(1, horizon + 1):
        fwd = f.apply_exact(fwd)
        bwd = _mod1(f.preimage_exact(bwd))
        if f.is_breakpoint(fwd):
            hits.append((k, fwd, f.jump(fwd)))
        if f.is_breakpoint(bwd):
            hits.append((-k, bwd, f.jump(bwd)))
    hits.sort(key=lambda h: h[0])
    tail = math.ceil(horizon / 4)
    certified = all(abs(k) <= horizon - tail for k, _, _ in hits)
    total = Fraction(1)
    for _, _, j in hits:
        total *= j
    return JumpReport(x, f.jump(x), total, horizon, certified, tuple(hits))


@dataclass(frozen=True)
class OrbitClass:
    members: tuple
    complete_jump: Fraction
    certified: bool


def pa_orbit_classes(f: PAMap, horizon: int):
    """Group the break points by orbit (within the horizon) with their complete jumps."""
    seen = set()
    classes = []
    for b in f.breakpoints:
        if b in seen:
            continue
        rep = pa_complete_jump(f, b, horizon)
        members = tuple(sorted({p for _, p, _ in rep.hits} | {b}))
        seen.update(members)
        classes.append(OrbitClass(members, rep.complete_jump, rep.certified))
    return classes


def pa_class_sum(f: PAMap, horizon: int) -> tuple[float, bool]:
    """``sum |log C|`` over orbit classes of break points, and whether all were certified."""
    classes = pa_orbit_classes(f, horizon)
    total = math.fsum(abs(frac_log(c.complete_jump)) for c in classes)
    return total, all(c.certified for c in classes)


@dataclass(frozen=True)
class BalanceReport:
    balanced: bool
    certified: bool
    witnesses: tuple


def balance_predicate(f: PAMap, horizon: int) -> BalanceReport:
    """True when every break point has complete jump 1 (checked within the horizon)."""
    classes = pa_orbit_classes(f, horizon)
    certified = all(c.certified for c in classes)
    if not certified:
        warnings.warn(
            f"complete jumps not certified within horizon {horizon}", UncertifiedHorizonWarning, stacklevel=2
        )
    balanced = all(c.complete_jump == 1 for c in classes)
    return BalanceReport(balanced, certified, tuple(classes))


def pa_var_sequence(f: PAMap, n_max: int, cap: int = DEFAULT_BREAKPOINT_CAP, keep=None) -> DistortionSeries:
    """Exact ``var(log Df^n)`` for n = 1..n_max (or only for n in ``keep``)."""
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    keep = None if keep is None else set(keep)
    ns, vs = [], []
    it = f
    for n in range(1, n_max + 1):
        if n > 1:
            it = pa_compose(f, it)
            if it.n_breakpoints > cap:
                raise ResourceLimitError(f"break point count {it.n_breakpoints} exceeds cap {cap} at n = {n}")
        if keep is None or n in keep:
            ns.append(n)
            vs.append(it.var_log_deriv())
    return DistortionSeries(np.array(ns), np.array(vs), "exact_pa")


def two_interval_map(value=Fraction(2, 11)) -> PAMap:
    """Slope 2 on [0, 1/3) and 1/2 on [1/3, 1); ``value`` is f(0).

    With the default f(0) = 2/11 the two break points lie on distinct orbits
    that avoid each other for at least 200 steps either way, and the break
    points of f^30 are more than 5e-5 apart.
    """
    return PAMap([Fraction(0), Fraction(1, 3)], [Fraction(2), Fraction(1, 2)], value)


def balanced_map() -> PAMap:
    """Slope 3/2 on [0, 1/2) and 1/2 on [1/2, 1) with f(1/2) = 0, so both jumps cancel along one orbit."""
    return PAMap([Fraction(0), Fraction(1, 2)], [Fraction(3, 2), Fraction(1, 2)], Fraction(1, 4))
