"""Total variation of ``log Df^n`` and asymptotic distortion estimates.

The variation of ``x -> log Df^n(x)`` is estimated from below as the sum of
absolute increments over nested partitions of [0, 1]: dyadic points
``k / 2^L`` for growing ``L``, optionally merged with extra points that a
caller knows to be relevant (Cantor gap end points, pulled-back break
points).  ``log Df^n`` is accumulated along forward orbits, one step at a
time, so iterates are never composed symbolically; a single orbit pass
yields the variation for every requested ``n``.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import NumericFailure, UnsupportedVariantError
from .maps import Map1D, circle_distance, wrap
from .cantor import CantorMap, cantor_gap_endpoints
from .mobius import MobiusMap, mobius_asymptotic_distortion, var_log_deriv_power
from .pa import PAMap, pa_iterate, pa_var_sequence
from .series import DistortionSeries

THREADS_ENV = "CIRCDIST_THREADS"


@dataclass(frozen=True)
class Schedule:
    """Dyadic refinement schedule: levels ``min_level..max_level``, stop when the relative change drops below ``rel_tol``."""

    min_level: int = 8
    max_level: int = 20
    rel_tol: float = 1e-7
    extra_points: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        if not 1 <= self.min_level <= self.max_level <= 26:
            raise ValueError("need 1 <= min_level <= max_level <= 26")

    def with_extra(self, pts):
        return Schedule(self.min_level, self.max_level, self.rel_tol, pts)


@dataclass
class PartitionEstimate:
    value: float
    partition_size: int
    history: list
    converged: bool
    rel_change: float
    missing: float = 0.0  # parabolic estimate of the variation still hidden between samples


def geometric_grid(n_max: int, count: int = 12) -> np.ndarray:
    """Roughly geometric integer grid from 1 to ``n_max`` inclusive."""
    if n_max < 1:
        raise ValueError("n_max must be positive")
    g = np.unique(np.round(np.geomspace(1, n_max, count)).astype(int))
    return np.unique(np.concatenate([[1], g, [n_max]]))


def _threads():
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _missing_mass(x, y, periodic):
    """Twice the summed overshoot of parabolas fitted at sampled local extrema.

    Refining a nested partition only helps where a new point lands closer to
    a local extremum, so an unchanged sum does not mean convergence; this
    estimates what the current samples still miss (exact for quadratic peaks).
    """
    if periodic and x.size > 2:
        # points 0 and 1 coincide on the circle
        x = np.concatenate([[x[-2] - 1.0], x[:-1], [1.0]])
        y = np.concatenate([[y[-2]], y[:-1], [y[0]]])
    d0 = y[:-2] - y[1:-1]
    d2 = y[2:] - y[1:-1]
    ext = d0 * d2 > 0
    if not np.any(ext):
        return 0.0
    t0 = (x[:-2] - x[1:-1])[ext]
    t2 = (x[2:] - x[1:-1])[ext]
    d0, d2 = d0[ext], d2[ext]
    det = t0 * t2 * (t0 - t2)
    a = (d0 * t2 - d2 * t0) / det
    b = (t0 * t0 * d2 - t2 * t2 * d0) / det
    with np.errstate(divide="ignore", invalid="ignore"):
        gain = np.where(a != 0, b * b / np.abs(4 * a), np.inf)
    gain = np.minimum(gain, np.maximum(np.abs(d0), np.abs(d2)))
    return float(2.0 * np.sum(gain))


def _orbit_tv(f: Map1D, pts: np.ndarray, keep: np.ndarray):
    """Variation of ``log Df^n`` over the sorted points ``pts`` for each n in ``keep``.

    Returns ``(tv, missing, first, last, error)``: per-n sums of |increments|,
    the missing-mass estimates, the first and last values (for stitching
    chunks) and the exception that stopped the orbit, if any (then trailing
    entries are NaN).
    """
    tv = np.full(keep.size, np.nan)
    missing = np.full(keep.size, np.nan)
    first = np.full(keep.size, np.nan)
    last = np.full(keep.size, np.nan)
    x = pts.copy()
    logd = np.zeros_like(x)
    j = 0
    n_max = int(keep[-1])
    for n in range(1, n_max + 1):
        try:
            y, ld = f.step(x)
            logd += ld
            y = np.asarray(y, dtype=float)
        except NumericFailure as err:
            err.orbit_index = n - 1
            return tv, missing, first, last, err
        x = y - np.floor(y) if f.periodic else np.clip(y, 0.0, 1.0)
        if n == keep[j]:
            tv[j] = np.sum(np.abs(np.diff(logd)))
            missing[j] = _missing_mass(pts, logd, f.periodic)
            first[j], last[j] = logd[0], logd[-1]
            j += 1
    return tv, missing, first, last, None


def _tv_points(f: Map1D, pts: np.ndarray, keep: np.ndarray):
    threads = _threads()
    if threads == 1 or pts.size < 4096 * threads:
        tv, missing, _, _, err = _orbit_tv(f, pts, keep)
        return tv, missing, err
    # chunks share no points; the increments across chunk boundaries are stitched
    # from first/last values (extrema sitting exactly on a seam escape the missing-mass check)
    chunks = np.array_split(pts, threads)
    with ThreadPoolExecutor(threads) as pool:
        parts = list(pool.map(lambda c: _orbit_tv(f, c, keep), chunks))
    tv = parts[0][0].copy()
    missing = sum(p[1] for p in parts)
    for prev, cur in zip(parts[:-1], parts[1:]):
        tv = tv + cur[0] + np.abs(cur[2] - prev[3])
    err = next((p[4] for p in parts if p[4] is not None), None)
    return tv, missing, err


def _level_points(level: int, extra) -> np.ndarray:
    pts = np.arange(2**level + 1) / 2.0**level
    if extra is not None and len(extra):
        pts = np.union1d(pts, np.clip(np.asarray(extra, dtype=float), 0.0, 1.0))
    return pts


def var_log_deriv_series_partition(f: Map1D, n_values, schedule: Schedule | None = None):
    """Partition estimates of ``var(log Df^n)`` for every n in ``n_values``.

    Returns ``(estimates, error)`` where ``estimates`` is a list of
    ``PartitionEstimate`` (one per n, in order) and ``error`` is the exception
    that truncated the orbit, if any.
    """
    schedule = schedule or Schedule()
    keep = np.unique(np.asarray(n_values, dtype=int))
    if keep.size == 0 or keep[0] < 1:
        raise ValueError("n values must be positive")
    history = [[] for _ in keep]
    prev = None
    rel = np.full(keep.size, np.inf)
    miss = np.full(keep.size, np.inf)
    error = None
    for level in range(schedule.min_level, schedule.max_level + 1):
        pts = _level_points(level, schedule.extra_points)
        tv, missing, error = _tv_points(f, pts, keep)
        if error is not None:
            # keep the n values the orbit reached before failing
            for i, v in enumerate(tv):
                if np.isfinite(v):
                    history[i].append((int(pts.size), float(v)))
            break
        for i, v in enumerate(tv):
            history[i].append((int(pts.size), float(v)))
        scale = np.maximum(np.abs(tv), 1e-300)
        miss = np.where(tv == 0, 0.0, missing / scale)
        if prev is not None:
            rel = np.where(tv == 0, 0.0, np.maximum(np.abs(tv - prev) / scale, miss))
            if np.all(rel < schedule.rel_tol):
                break
        prev = tv
    out = []
    for i in range(keep.size):
        if not history[i]:
            continue
        size, val = history[i][-1]
        # the partitions are nested, so the best lower bound is the largest value seen
        best = max(v for _, v in history[i])
        r = float(rel[i]) if np.isfinite(rel[i]) else float("inf")
        out.append(PartitionEstimate(best, size, history[i], bool(r < schedule.rel_tol), r, float(miss[i])))
    return out, error


def total_variation_log_deriv(f: Map1D, schedule: Schedule | None = None) -> PartitionEstimate:
    """``var(log Df)`` as a refined-partition lower bound."""
    return var_log_deriv_iterate(f, 1, schedule)


def var_log_deriv_iterate(f: Map1D, n: int, schedule: Schedule | None = None) -> PartitionEstimate:
    if n < 1:
        raise ValueError("n must be at least 1")
    est, err = var_log_deriv_series_partition(f, [n], schedule)
    if err is not None:
        raise err
    return est[0]


def _partition_series(f, n_values, schedule):
    est, err = var_log_deriv_series_partition(f, n_values, schedule)
    ns = np.unique(np.asarray(n_values, dtype=int))[: len(est)]
    return DistortionSeries(
        ns,
        np.array([e.value for e in est]),
        "partition",
        converged=np.array([e.converged for e in est], dtype=bool),
        complete=err is None,
        error=None if err is None else str(err),
    )


def asymptotic_distortion(f: Map1D, n_max: int, schedule: Schedule | None = None, n_values=None) -> DistortionSeries:
    """Series ``var(log Df^n)/n`` on a geometric grid of ``n <= n_max``.

    Piecewise-affine maps use exact iteration and Moebius maps the closed
    form ``4 dist_h(0, f^n(0))``; everything else goes through partitions.
    """
    if n_max < 2:
        raise ValueError("n_max must be at least 2")
    grid = geometric_grid(n_max) if n_values is None else np.unique(np.asarray(n_values, dtype=int))
    if isinstance(f, PAMap):
        return pa_var_sequence(f, int(grid[-1]), keep=grid.tolist())
    if isinstance(f, MobiusMap):
        var = np.array([var_log_deriv_power(f, int(n)) for n in grid])
        return DistortionSeries(grid, var, "closed_mobius")
    return _partition_series(f, grid, schedule)


def limit_estimate(f: Map1D, n_max: int = 200) -> float:
    """Exact-path limit of ``var(log Df^n)/n``: closed form for Moebius maps, infimum of the exact sequence for PA maps."""
    if isinstance(f, MobiusMap):
        return mobius_asymptotic_distortion(f)
    if isinstance(f, PAMap):
        return pa_var_sequence(f, n_max).fekete_estimate
    raise UnsupportedVariantError("exact limits exist only for piecewise-affine and Moebius maps")


class StabilityReport(NamedTuple):
    k: int
    dist_f: float
    dist_fk: float
    ratio: float
    consistent: bool


def stability_check(f: Map1D, k: int, n_max: int = 120, tol: float = 1e-6) -> StabilityReport:
    """Compare the limit for ``f^k`` with ``k`` times the limit for ``f`` on exact paths."""
    if k < 1:
        raise ValueError("k must be at least 1")
    if isinstance(f, MobiusMap):
        fk = f.power(k)
        d, dk = limit_estimate(f), limit_estimate(fk)
    elif isinstance(f, PAMap):
        fk = pa_iterate(f, k)
        d, dk = limit_estimate(f, n_max), limit_estimate(fk, max(1, n_max // k))
    else:
        raise UnsupportedVariantError("stability check needs an exact-path map")
    ratio = dk / d if d > 0 else float("nan")
    consistent = abs(dk - k * d) <= tol * max(1.0, k * d)
    return StabilityReport(k, d, dk, ratio, consistent)


class Proximity(NamedTuple):
    c0: float
    dlog: float
    var: float
    converged: bool


def rotation_proximity(g: Map1D, rho: float, schedule: Schedule | None = None, grid: int = 2**14) -> Proximity:
    """Distance of ``g`` to the rotation ``R_rho`` in the C^{1+bv} gauge.

    ``c0 = sup |g(x) - x - rho|`` on the circle, ``dlog = sup |log Dg|``, ``var = var(log Dg)``.
    """
    x = np.arange(grid) / grid
    c0 = float(np.max(circle_distance(g(x), x + rho)))
    dlog = float(np.max(np.abs(g.log_deriv(x))))
    est = total_variation_log_deriv(g, schedule)
    return Proximity(c0, dlog, est.value, est.converged)


def cantor_partition_points(f: Map1D, depth: int = 12, pullbacks: int = 0) -> np.ndarray:
    """Cantor gap end points of the given depth together with their images under ``f^{-j}``, j <= pullbacks."""
    base = cantor_gap_endpoints(depth)
    pts = [base]
    cur = base
    for _ in range(pullbacks):
        cur = np.asarray(wrap(f.invert(cur)), dtype=float)
        pts.append(cur)
    return np.unique(np.concatenate(pts))


def cantor_lower_bound(
    f: CantorMap, n_max: int, schedule: Schedule | None = None, depth: int = 12,
    pullbacks: int | None = None, n_values=None,
) -> DistortionSeries:
    """Certified lower bounds of ``var(log Df^n)/n`` on partitions adapted to the Cantor component.

    The singular part of ``log Df o f^k`` lives on ``f^{-k}(K)``, so the
    partition contains the gap end points of ``K`` pulled back by ``f^{-j}``
    for ``j < pullbacks`` (default ``n_max - 1``).
    """
    schedule = schedule or Schedule(min_level=10, max_level=14, rel_tol=1e-4)
    pullbacks = n_max - 1 if pullbacks is None else pullbacks
    extra = cantor_partition_points(f, depth, pullbacks)
    grid = np.arange(1, n_max + 1) if n_values is None else np.unique(np.asarray(n_values, dtype=int))
    series = _partition_series(f, grid, schedule.with_extra(extra))
    series.meta.update({"cantor_depth": depth, "pullbacks": pullbacks, "extra_points": int(extra.size)})
    return series


def quadrature_var_log_deriv(f: Map1D, points: int = 2**16) -> float:
    """``int |D^2 f / Df|`` by the periodic trapezoid rule (valid when Df is absolutely continuous)."""
    x = np.arange(points) / points
    return float(np.mean(np.abs(f.affine_deriv(x))))


def twisted_birkhoff_norm(f: Map1D, phi, n: int, points: int = 4096) -> float:
    """``(1/n) || sum_{k<n} (phi o f^k) Df^k ||_{L^1}`` on a uniform grid (trapezoid rule)."""
    x = np.arange(points) / points
    acc = np.zeros(points)
    logd = np.zeros(points)
    y = x.copy()
    for _ in range(n):
        acc += phi(y) * np.exp(logd)
        logd += f.log_deriv(y)
        y = np.asarray(wrap(f.lift(y)), dtype=float)
    return float(np.mean(np.abs(acc)) / n)
