"""The sequence ``n -> var(log Df^n) / n`` together with its running infimum."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

SOURCES = ("exact_pa", "closed_mobius", "partition")


def fmt(x) -> str:
    """Locale-independent 12-significant-digit formatting used in every CSV."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".12g")


@dataclass
class DistortionSeries:
    n_values: np.ndarray
    var_values: np.ndarray
    source: str
    converged: np.ndarray | None = None
    complete: bool = True
    error: str | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.n_values = np.asarray(self.n_values, dtype=int)
        self.var_values = np.asarray(self.var_values, dtype=float)
        if self.source not in SOURCES:
            raise ValueError(f"unknown series source {self.source!r}")
        if self.converged is None:
            self.converged = np.ones(self.n_values.shape, dtype=bool)
        self.converged = np.asarray(self.converged, dtype=bool)

    @property
    def per_n(self) -> np.ndarray:
        return self.var_values / self.n_values

    @property
    def fekete_running(self) -> np.ndarray:
        return np.minimum.accumulate(self.per_n) if self.per_n.size else self.per_n

    @property
    def fekete_estimate(self) -> float:
        """``min_m var_m / m``; the limit equals the infimum for subadditive data."""
        return float(np.min(self.per_n)) if self.per_n.size else float("nan")

    def value_at(self, n: int) -> float:
        idx = np.flatnonzero(self.n_values == n)
        if idx.size == 0:
            raise KeyError(f"n = {n} not in series")
        return float(self.var_values[idx[0]])

    def subadditivity_violations(self, slack=1e-9):
        """Pairs (m, k) in the sampled grid with var_{m+k} > var_m + var_k + slack."""
        lookup = dict(zip(self.n_values.tolist(), self.var_values.tolist()))
        bad = []
        for m in lookup:
            for k in lookup:
                if m <= k and m + k in lookup and lookup[m + k] > lookup[m] + lookup[k] + slack:
                    bad.append((m, k))
        return bad

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "var", "var_over_n", "fekete", "converged"])
        for row in zip(self.n_values, self.var_values, self.per_n, self.fekete_running, self.converged):
            w.writerow([fmt(v) for v in row])
        return buf.getvalue()

    def summary(self) -> dict:
        return {
            "source": self.source,
            "fekete_estimate": self.fekete_estimate,
            "n_max": int(self.n_values.max()) if self.n_values.size else 0,
            "complete": self.complete,
            "all_converged": bool(np.all(self.converged)),
            "error": self.error,
        }

    def to_json(self) -> str:
        return json.dumps({
            **self.summary(),
            "n": self.n_values.tolist(),
            "var": self.var_values.tolist(),
            "converged": self.converged.tolist(),
            "meta": self.meta,
        })
