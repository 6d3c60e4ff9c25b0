"""JSON map descriptions: a ``kind`` tag plus parameters, parsed into map objects.

Every object is checked against an explicit field list; unknown or missing
fields raise ``ConfigError`` naming the offending path (``map.f.coefficients``).
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .catalog import random_fourier
from .conjugation import parabolic_patch_build, cantor_map_build
from .errors import ConstructionError
from .interval import ParabolicRestriction
from .maps import Compose, FourierDiffeo, Identity, Inverse, Rotation, conjugate, tune_rotation_number
from .mobius import MobiusMap
from .pa import PAMap, two_interval_map, balanced_map
from .sampled import SampledDiffeo


class ConfigError(ValueError):
    """Invalid configuration; ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def check_fields(obj, path: str, required=(), optional=()):
    if not isinstance(obj, dict):
        raise ConfigError(path, "expected an object")
    allowed = set(required) | set(optional)
    for key in obj:
        if key not in allowed:
            raise ConfigError(f"{path}.{key}", f"unknown field (allowed: {', '.join(sorted(allowed))})")
    for key in required:
        if key not in obj:
            raise ConfigError(f"{path}.{key}", "missing required field")


def get_number(obj, key, path, default=None, lo=None, hi=None, integer=False):
    if key not in obj:
        if default is None:
            raise ConfigError(f"{path}.{key}", "missing required field")
        return default
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{path}.{key}", f"expected a number, got {v!r}")
    if integer and not float(v).is_integer():
        raise ConfigError(f"{path}.{key}", f"expected an integer, got {v!r}")
    if not np.isfinite(v):
        raise ConfigError(f"{path}.{key}", "must be finite")
    if lo is not None and v < lo:
        raise ConfigError(f"{path}.{key}", f"must be >= {lo}")
    if hi is not None and v > hi:
        raise ConfigError(f"{path}.{key}", f"must be <= {hi} (hard cap)")
    return int(v) if integer else float(v)


def _pairs(value, path):
    if not isinstance(value, list):
        raise ConfigError(path, "expected a list of [a, b] pairs")
    out = []
    for i, p in enumerate(value):
        if not (isinstance(p, list) and len(p) == 2 and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in p)):
            raise ConfigError(f"{path}[{i}]", "expected a pair of numbers")
        out.append((float(p[0]), float(p[1])))
    return tuple(out)


def _rational(value, path):
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise ConfigError(path, "rationals are given as integers or strings like '2/11'")
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError) as err:
        raise ConfigError(path, f"not a rational: {value!r}") from err


KINDS = (
    "rotation", "identity", "fourier", "random_fourier", "mobius", "pa", "pa_named", "sampled",
    "compose", "inverse", "conjugate", "cantor", "parabolic", "parabolic_patch",
)


def parse_map(desc, path: str = "map", rng: np.random.Generator | None = None):
    """Build a map from its JSON description."""
    if not isinstance(desc, dict):
        raise ConfigError(path, "expected an object with a 'kind' field")
    kind = desc.get("kind")
    if kind not in KINDS:
        raise ConfigError(f"{path}.kind", f"unknown map kind {kind!r} (known: {', '.join(KINDS)})")
    try:
        return _BUILDERS[kind](desc, path, rng)
    except ConstructionError as err:
        raise ConfigError(path, str(err)) from err


def _rotation(d, path, rng):
    check_fields(d, path, ["kind", "rho"])
    return Rotation(get_number(d, "rho", path))


def _identity(d, path, rng):
    check_fields(d, path, ["kind"], ["periodic"])
    return Identity(bool(d.get("periodic", True)))


def _tuned(base, d, path):
    if "tune_rho" not in d:
        return base
    rho = get_number(d, "tune_rho", path)
    _, f = tune_rotation_number(base.with_shift, rho, rho - 0.5, rho + 0.5)
    return f


def _fourier(d, path, rng):
    check_fields(d, path, ["kind", "coefficients"], ["mean_shift", "tune_rho"])
    if "mean_shift" in d and "tune_rho" in d:
        raise ConfigError(f"{path}.tune_rho", "give either mean_shift or tune_rho")
    base = FourierDiffeo(get_number(d, "mean_shift", path, 0.0), _pairs(d["coefficients"], f"{path}.coefficients"))
    return _tuned(base, d, path)


def _random_fourier(d, path, rng):
    check_fields(d, path, ["kind"], ["modes", "scale", "mean_shift"])
    if rng is None:
        rng = np.random.default_rng(0)
    modes = get_number(d, "modes", path, 3, 1, 64, integer=True)
    scale = get_number(d, "scale", path, 0.02, 0.0, 0.1)
    shift = get_number(d, "mean_shift", path) if "mean_shift" in d else None
    return random_fourier(rng, modes, scale, shift)


def _mobius(d, path, rng):
    check_fields(d, path, ["kind"], ["matrix", "disk_a", "alpha"])
    if "matrix" in d:
        m = d["matrix"]
        ok = isinstance(m, list) and len(m) == 2 and all(isinstance(r, list) and len(r) == 2 for r in m)
        if not ok or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for r in m for v in r):
            raise ConfigError(f"{path}.matrix", "expected a 2x2 list of numbers")
        if np.linalg.det(np.array(m, dtype=float)) <= 0:
            raise ConfigError(f"{path}.matrix", "determinant must be positive")
        return MobiusMap(m)
    if "disk_a" not in d:
        raise ConfigError(f"{path}.matrix", "give either matrix or disk_a")
    a = d["disk_a"]
    if isinstance(a, list) and len(a) == 2:
        a = complex(get_number({"re": a[0]}, "re", f"{path}.disk_a"), get_number({"im": a[1]}, "im", f"{path}.disk_a"))
    else:
        a = get_number(d, "disk_a", path)
    return MobiusMap.from_disk(a, get_number(d, "alpha", path, 0.0))


def _pa(d, path, rng):
    check_fields(d, path, ["kind", "pieces"])
    pieces = d["pieces"]
    if not isinstance(pieces, list) or not pieces:
        raise ConfigError(f"{path}.pieces", "expected a non-empty list")
    clean = []
    for i, p in enumerate(pieces):
        pp = f"{path}.pieces[{i}]"
        check_fields(p, pp, ["breakpoint", "value", "slope"])
        clean.append({k: str(_rational(p[k], f"{pp}.{k}")) for k in ("breakpoint", "value", "slope")})
    return PAMap.from_pieces(clean)


def _pa_named(d, path, rng):
    check_fields(d, path, ["kind", "name"], ["value"])
    name = d["name"]
    if name == "two_interval":
        return two_interval_map(_rational(d["value"], f"{path}.value")) if "value" in d else two_interval_map()
    if name == "balanced":
        if "value" in d:
            raise ConfigError(f"{path}.value", "the balanced map takes no parameters")
        return balanced_map()
    raise ConfigError(f"{path}.name", f"unknown PA map {name!r} (known: two_interval, balanced)")


def _sampled(d, path, rng):
    check_fields(d, path, ["kind", "values", "dvalues"], ["ddvalues", "periodic"])
    return SampledDiffeo(d["values"], d["dvalues"], d.get("ddvalues"), periodic=bool(d.get("periodic", True)))


def _compose(d, path, rng):
    check_fields(d, path, ["kind", "maps"])
    maps = d["maps"]
    if not isinstance(maps, list) or not maps:
        raise ConfigError(f"{path}.maps", "expected a non-empty list (outermost first)")
    parsed = [parse_map(m, f"{path}.maps[{i}]", rng) for i, m in enumerate(maps)]
    out = parsed[-1]
    for m in reversed(parsed[:-1]):
        out = Compose(m, out)
    return out


def _inverse(d, path, rng):
    check_fields(d, path, ["kind", "map"])
    return Inverse(parse_map(d["map"], f"{path}.map", rng))


def _conjugate(d, path, rng):
    check_fields(d, path, ["kind", "h", "f"])
    return conjugate(parse_map(d["h"], f"{path}.h", rng), parse_map(d["f"], f"{path}.f", rng))


def _cantor(d, path, rng):
    check_fields(d, path, ["kind", "c"], ["smoothing", "rho", "grid", "depth"])
    rho = get_number(d, "rho", path) if "rho" in d else None
    smoothing = _pairs(d["smoothing"], f"{path}.smoothing") if "smoothing" in d else ((0.0, 0.1),)
    return cantor_map_build(
        get_number(d, "c", path, lo=-20, hi=20), smoothing,
        grid=get_number(d, "grid", path, 2**18, 2**8, 2**22, integer=True),
        rho=rho, depth=get_number(d, "depth", path, 40, 10, 60, integer=True),
    )


def _parabolic(d, path, rng):
    check_fields(d, path, ["kind", "tau"])
    return ParabolicRestriction(get_number(d, "tau", path))


def _parabolic_patch(d, path, rng):
    check_fields(d, path, ["kind"], ["which", "a", "b", "tau", "bump"])
    which = d.get("which", "f")
    if which not in ("f", "fhat"):
        raise ConfigError(f"{path}.which", "expected 'f' or 'fhat'")
    b = get_number(d, "b", path) if "b" in d else None
    bump = d.get("bump")
    if bump is not None:
        check_fields(bump, f"{path}.bump", [], ["width", "amplitude"])
    ex = parabolic_patch_build(get_number(d, "a", path, 0.5), b, bump, get_number(d, "tau", path, 0.01))
    return ex.f if which == "f" else ex.fhat


_BUILDERS = {
    "rotation": _rotation, "identity": _identity, "fourier": _fourier, "random_fourier": _random_fourier,
    "mobius": _mobius, "pa": _pa, "pa_named": _pa_named, "sampled": _sampled, "compose": _compose,
    "inverse": _inverse, "conjugate": _conjugate, "cantor": _cantor, "parabolic": _parabolic,
    "parabolic_patch": _parabolic_patch,
}
