"""Explicit conjugating maps and the experiment builders that exercise them.

All conjugators are returned as ``SampledDiffeo`` objects normalised by
``h(0) = 0``.  Averages of derivatives are accumulated along orbits of the
grid points; affine derivatives of iterates use the cocycle relation

    D^2 f^{k+1} / Df^{k+1} (x) = (D^2 f / Df)(f^k x) Df^k(x) + D^2 f^k / Df^k (x).
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import CommutativityError, ConstructionError, ResourceLimitError
from .interval import BumpDiffeo, ParabolicRestriction, SmoothPatch
from .maps import GOLDEN, Map1D, circle_distance, conjugate, tune_rotation_number
from .cantor import CantorMap
from .sampled import SampledDiffeo, integrate_periodic, uniform_grid

__all__ = [
    "PsiField", "birkhoff_psi", "mean_conjugator", "conjugate", "path_conjugator",
    "orbit_mean_conjugator", "conjugacy_defect", "box_conjugator", "box_affine_decay",
    "parabolic_patch_build", "cantor_map_build", "default_schedule_u",
]


class DegenerateDerivativeWarning(UserWarning):
    """A conjugator's derivative came close to zero somewhere on the grid."""


@dataclass(frozen=True)
class PsiField:
    """Samples of ``psi_n = (1/n) sum_{k<n} D^2 f^k / Df^k`` on the closed grid."""

    n: int
    grid: np.ndarray
    values: np.ndarray

    @property
    def mean(self) -> float:
        # trapezoid on the periodic grid
        return float(np.mean(self.values[:-1]))


def _birkhoff_sums(f: Map1D, n: int, size: int):
    """``(1/n) sum_{k<n} log Df^k`` and ``(1/n) sum_{k<n} D^2 f^k / Df^k`` on the grid.

    Also returns the values for n + 1 (one more orbit step), used by the path
    interpolation.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    x = uniform_grid(size)
    y = x.copy()
    logd = np.zeros_like(x)
    ad = np.zeros_like(x)
    sum_logd = np.zeros_like(x)
    sum_ad = np.zeros_like(x)
    for _ in range(n):
        sum_logd += logd
        sum_ad += ad
        y, ld, a = f.jet(y)
        ad = a * np.exp(logd) + ad
        logd = logd + ld
        y = np.asarray(y, dtype=float)
    return x, sum_logd / n, sum_ad / n, (sum_logd + logd) / (n + 1), (sum_ad + ad) / (n + 1)


def birkhoff_psi(f: Map1D, n: int, grid: int = 4096) -> PsiField:
    x, _, psi, _, _ = _birkhoff_sums(f, n, grid)
    return PsiField(n, x, psi)


def mean_conjugator(f: Map1D, n: int, grid: int = 4096) -> SampledDiffeo:
    """``Dh_n`` proportional to the geometric mean of ``Df^k``, k < n."""
    _, logd, psi, _, _ = _birkhoff_sums(f, n, grid)
    return SampledDiffeo.from_log_derivative(logd, psi, periodic=f.periodic)


def conjugator_from_psi(psi: np.ndarray, periodic: bool = True) -> SampledDiffeo:
    """``h`` with ``log Dh = int_0^x psi`` up to normalisation."""
    logd = integrate_periodic(psi)
    return SampledDiffeo.from_log_derivative(logd, psi, periodic=periodic)


def default_schedule_u(t: float) -> float:
    return t / (1.0 - t)


def path_conjugator(f: Map1D, t: float, u: Callable[[float], float] = default_schedule_u, grid: int = 4096) -> SampledDiffeo:
    """Conjugator ``g_t`` built from ``(n + 1 - u) psi_n + (u - n) psi_{n+1}``, ``n = floor(u(t))``.

    ``psi_0`` is zero, so ``g_0`` is the identity; at integer ``u(t) = n`` the
    map is the one built from ``psi_n`` alone.
    """
    if not 0.0 <= t < 1.0:
        raise ValueError("t must lie in [0, 1)")
    ut = float(u(t))
    if ut < 0:
        raise ValueError("schedule must map [0, 1) to [0, infinity)")
    n = int(np.floor(ut))
    if n == 0:
        _, _, psi1, _, _ = _birkhoff_sums(f, 1, grid)
        psi = ut * psi1
    else:
        _, _, psi_n, _, psi_n1 = _birkhoff_sums(f, n, grid)
        psi = (n + 1 - ut) * psi_n + (ut - n) * psi_n1
    return conjugator_from_psi(psi, periodic=f.periodic)


def orbit_mean_conjugator(f: Map1D, n: int, rho: float, grid: int = 4096) -> SampledDiffeo:
    """``h_n^*(x) = (1/n) sum_{k<n} (F^k(x) - k rho)``, shifted so that ``h(0) = 0``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    x = uniform_grid(grid)
    y = x.copy()
    acc = np.zeros_like(x)
    dacc = np.zeros_like(x)
    ddacc = np.zeros_like(x)
    logd = np.zeros_like(x)
    ad = np.zeros_like(x)
    for k in range(n):
        d = np.exp(logd)
        acc += y - k * rho
        dacc += d
        ddacc += d * ad
        y, ld, a = f.jet(y)
        ad = a * d + ad
        logd = logd + ld
        y = np.asarray(y, dtype=float)
    vals = (acc - acc[0]) / n
    d = dacc / n
    if np.min(d) < 1e-9:
        warnings.warn("averaged map has a nearly vanishing derivative", DegenerateDerivativeWarning, stacklevel=2)
    # h(1) - h(0) = 1 holds exactly for lifts; remove rounding drift
    vals = vals / vals[-1]
    return SampledDiffeo(vals, d, ddacc / n, periodic=f.periodic)


def conjugacy_defect(f: Map1D, h: Map1D, rho: float, points: int = 4096) -> float:
    """``sup |h f - R_rho h|`` on the circle."""
    x = np.arange(points) / points
    return float(np.max(circle_distance(h(f(x)), h(x) + rho)))


def check_commuting(gens: Sequence[Map1D], points: int = 257, tol: float = 1e-8):
    x = np.arange(points) / points
    for g1, g2 in itertools.combinations(gens, 2):
        d = np.max(circle_distance(g1(g2(x)), g2(g1(x))))
        if d > tol:
            raise CommutativityError(f"generators fail to commute (defect {d:.3g})")


def _box_sums(gens: Sequence[Map1D], n: int, size: int):
    """Sums of ``log Dg`` and ``D^2 g / Dg`` over ``g`` in the box ``{g_1^{n_1} ... g_k^{n_k}: 0 <= n_i < n}``."""
    x = uniform_grid(size)
    sum_logd = np.zeros_like(x)
    sum_ad = np.zeros_like(x)

    def visit(level, y, logd, ad):
        nonlocal sum_logd, sum_ad
        # gens[level] is applied after all deeper generators (composition order g_1 ... g_k)
        g = gens[level]
        for m in range(n):
            if level == 0:
                sum_logd = sum_logd + logd
                sum_ad = sum_ad + ad
            else:
                visit(level - 1, y, logd, ad)
            if m < n - 1:
                y, ld, a = g.jet(y)
                ad = a * np.exp(logd) + ad
                logd = logd + ld
                y = np.asarray(y, dtype=float)

    visit(len(gens) - 1, x, np.zeros_like(x), np.zeros_like(x))
    count = n ** len(gens)
    return sum_logd / count, sum_ad / count


def box_conjugator(
    gens: Sequence[Map1D], n: int, grid: int = 4096, budget: int = 100_000, check: bool = True,
) -> SampledDiffeo:
    """``Dh_n`` proportional to the geometric mean of ``Dg`` over the box ``B(n - 1)``."""
    if not gens:
        raise ValueError("need at least one generator")
    if n < 1:
        raise ValueError("n must be at least 1")
    if n ** len(gens) > budget:
        raise ResourceLimitError(f"box of size {n}^{len(gens)} exceeds budget {budget}")
    if check:
        check_commuting(gens)
    logd, psi = _box_sums(gens, n, grid)
    return SampledDiffeo.from_log_derivative(logd, psi, periodic=gens[0].periodic)


class DecayReport(NamedTuple):
    n_values: tuple
    sup_affine: tuple  # per n: tuple of sup |D^2 g / Dg| per conjugated generator
    max_per_n: tuple


def box_affine_decay(gens: Sequence[Map1D], n_values=(3, 6, 12), grid: int = 4096, points: int = 4096) -> DecayReport:
    """``sup |affine derivative|`` of ``h_n g_i h_n^{-1}`` for each n, with ``h_n`` the box conjugator."""
    x = np.arange(points) / points
    rows = []
    for n in n_values:
        h = box_conjugator(gens, n, grid)
        rows.append(tuple(float(np.max(np.abs(conjugate(h, g).affine_deriv(x)))) for g in gens))
    return DecayReport(tuple(n_values), tuple(rows), tuple(max(r) for r in rows))


class ParabolicPatch(NamedTuple):
    fhat: ParabolicRestriction
    f: SmoothPatch
    delta: float
    a: float
    b: float


def parabolic_patch_build(a: float = 0.5, b: float | None = None, bump: dict | None = None, tau: float = 0.01) -> ParabolicPatch:
    """Parabolic restriction ``fhat`` and a smooth modification ``f`` supported in ``(a, fhat(a))``.

    ``f = fhat o k`` with a bump diffeomorphism ``k`` centred at ``b``, so
    ``f(b) = fhat(b)`` while ``Df(b) = (1 + amplitude) Dfhat(b)``.
    ``bump`` may set ``width`` and ``amplitude`` (defaults 0.45 (fhat(a) - a) and -0.6).
    """
    fhat = ParabolicRestriction(tau)
    fa = float(fhat.lift(a))
    if b is None:
        b = a + 0.5 * (fa - a)
    if not 0 < a < b < fa < 1:
        raise ConstructionError("need 0 < a < b < fhat(a) < 1")
    bump = dict(bump or {})
    unknown = set(bump) - {"center", "width", "amplitude"}
    if unknown:
        raise ConstructionError(f"unknown bump fields {sorted(unknown)}")
    if "center" in bump and bump["center"] != b:
        raise ConstructionError("bump must be centred at b so that f(b) = fhat(b)")
    width = float(bump.get("width", 0.45 * (fa - a)))
    amp = float(bump.get("amplitude", -0.6))
    if not (a < b - width and b + width < fa):
        raise ConstructionError("bump support must lie inside (a, fhat(a))")
    k = BumpDiffeo(b, width, amp)
    f = SmoothPatch(fhat, k)
    s = np.linspace(b - width, b + width, 20001)
    if np.min(f.lift(s) - s) <= 0:
        raise ConstructionError("modification creates a fixed point inside (0, 1)")
    delta = abs(float(fhat.log_deriv(b)) - float(f.log_deriv(b)))
    return ParabolicPatch(fhat, f, delta, a, b)


def cantor_map_build(
    c: float, smoothing=((0.0, 0.1),), grid: int = 2**18, rho: float | None = GOLDEN, depth: int = 40,
) -> CantorMap:
    """Circle diffeomorphism with Cantor weight ``c``; the rotation part is tuned to ``rho`` when given."""
    base = CantorMap(c, smoothing, 0.0, grid, depth)
    if rho is None:
        return base
    _, f = tune_rotation_number(base.with_shift, rho, rho - 1.0, rho + 1.0)
    return f
