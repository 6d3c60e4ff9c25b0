"""Standard maps used by the experiments, demos and tests."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .maps import GOLDEN, FourierDiffeo, Rotation, conjugate, tune_rotation_number

SILVER = np.sqrt(2.0) - 1.0

# smooth conjugator for the linearizable examples
STANDARD_H = ((0.03, 0.02), (0.0, 0.01))

# tuned Fourier maps: (coefficients, target rotation number)
FOURIER_FAMILY = (
    (((0.05, 0.03),), GOLDEN),
    (((0.04, 0.0), (0.0, 0.015)), SILVER),
    (((0.02, -0.03), (0.01, 0.0), (0.0, 0.004)), (np.sqrt(5.0) - 2.0)),
)


def standard_h(coefficients=STANDARD_H) -> FourierDiffeo:
    return FourierDiffeo(0.0, coefficients)


def conjugated_rotation(rho: float = GOLDEN, coefficients=STANDARD_H):
    """``h R_rho h^{-1}`` for the smooth Fourier map ``h``; smooth with rotation number ``rho``."""
    return conjugate(standard_h(coefficients), Rotation(rho))


def commuting_pair(rho1: float = GOLDEN, rho2: float = SILVER, coefficients=STANDARD_H):
    return conjugated_rotation(rho1, coefficients), conjugated_rotation(rho2, coefficients)


@lru_cache(maxsize=None)
def tuned_fourier(index: int) -> FourierDiffeo:
    """Member ``index`` of ``FOURIER_FAMILY`` with mean shift tuned to its target rotation number."""
    coeffs, rho = FOURIER_FAMILY[index]
    base = FourierDiffeo(0.0, coeffs)
    _, f = tune_rotation_number(base.with_shift, rho, rho - 0.5, rho + 0.5)
    return f


def random_fourier(rng: np.random.Generator, modes: int = 3, scale: float = 0.02, shift: float | None = None):
    """Fourier diffeomorphism with coefficients uniform in ``[-scale/k^2, scale/k^2]``."""
    k = np.arange(1, modes + 1)
    a = rng.uniform(-1, 1, modes) * scale / k**2
    b = rng.uniform(-1, 1, modes) * scale / k**2
    c = rng.uniform(0, 1) if shift is None else shift
    return FourierDiffeo(c, tuple(zip(a.tolist(), b.tolist())))
