"""Command-line experiment runner.

    circdist <rotno|distortion|approximate|experiment> --config path.json [--out dir] [--seed k]

Each run writes ``<id>.csv`` (deterministic: reals at 12 significant
digits, fixed row order) and ``<id>.json`` (the same rows plus config hash,
flags, summary and wall-clock time) into ``--out``.

Exit codes: 0 success, 2 configuration error, 3 numeric non-convergence
(partial output written), 4 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
import time
import warnings
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .catalog import STANDARD_H, commuting_pair
from .conjugation import (
    box_conjugator, parabolic_patch_build, orbit_mean_conjugator, conjugacy_defect, cantor_map_build,
    mean_conjugator, box_affine_decay, path_conjugator,
)
from .distortion import (
    Schedule, asymptotic_distortion, geometric_grid, limit_estimate, cantor_lower_bound,
    rotation_proximity, total_variation_log_deriv,
)
from .errors import (
    CommutativityError, ConstructionError, NumericFailure, ResourceLimitError, UncertifiedHorizonWarning,
    UnsupportedVariantError,
)
from .mapspec import ConfigError, _pairs, check_fields, get_number, parse_map
from .maps import conjugate, rotation_estimate
from .mobius import MobiusMap, var_log_deriv_closed
from .pa import PAMap, frac_log, balance_predicate, pa_class_sum, pa_complete_jump, pa_var_sequence
from .series import fmt

SCHEMA_VERSION = 1
EXIT_OK, EXIT_CONFIG, EXIT_NONCONVERGED, EXIT_RESOURCE = 0, 2, 3, 4

# hard caps on numeric knobs
MAX_N = 1_000_000
MAX_DISTORTION_N = 100_000
MAX_GRID = 2**16
MAX_LEVEL = 24
MAX_HORIZON = 10_000
MAX_PA_CAP = 1_000_000
MAX_BUDGET = 1_000_000

EXPERIMENTS = ("parabolic-patch", "cantor", "mobius-table", "pa-jump", "box-decay")
COMMON = ("schema", "id", "seed")


@dataclass
class ResultRecord:
    experiment: str
    config_hash: str
    columns: list
    rows: list
    flags: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    wall_clock: float = 0.0
    exit_code: int = EXIT_OK

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([v if isinstance(v, str) else fmt(v) for v in row])
        return buf.getvalue()

    def to_json(self) -> str:
        def clean(v):
            if isinstance(v, (np.bool_, bool)):
                return bool(v)
            if isinstance(v, (np.integer,)):
                return int(v)
            if isinstance(v, (np.floating, float)):
                v = float(v)
                return v if np.isfinite(v) else str(v)
            if isinstance(v, dict):
                return {k: clean(x) for k, x in v.items()}
            if isinstance(v, (list, tuple)):
                return [clean(x) for x in v]
            return v

        return json.dumps(clean({
            "experiment": self.experiment,
            "config_sha256": self.config_hash,
            "columns": self.columns,
            "rows": self.rows,
            "flags": self.flags,
            "summary": self.summary,
            "wall_clock_s": self.wall_clock,
            "exit_code": self.exit_code,
        }), indent=1)


def config_hash(config: dict, seed) -> str:
    text = json.dumps({"config": config, "seed": seed}, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def load_config(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise ConfigError("--config", f"cannot read {path}: {err.strerror}") from err
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(f"line {err.lineno} column {err.colno}", f"malformed JSON: {err.msg}") from err
    if not isinstance(cfg, dict):
        raise ConfigError("config", "top level must be an object")
    if cfg.get("schema") != SCHEMA_VERSION:
        raise ConfigError("config.schema", f"expected schema version {SCHEMA_VERSION}, got {cfg.get('schema')!r}")
    return cfg


def _schedule(cfg, path="config", default=None):
    default = default or Schedule()
    if "schedule" not in cfg:
        return default
    s = cfg["schedule"]
    p = f"{path}.schedule"
    check_fields(s, p, [], ["min_level", "max_level", "rel_tol"])
    lo = get_number(s, "min_level", p, default.min_level, 1, MAX_LEVEL, integer=True)
    hi = get_number(s, "max_level", p, default.max_level, 1, MAX_LEVEL, integer=True)
    if lo > hi:
        raise ConfigError(f"{p}.min_level", "must not exceed max_level")
    return Schedule(lo, hi, get_number(s, "rel_tol", p, default.rel_tol, 1e-15, 1.0))


def _int_list(cfg, key, path, lo=1, hi=MAX_N):
    v = cfg[key]
    if not isinstance(v, list) or not v:
        raise ConfigError(f"{path}.{key}", "expected a non-empty list")
    return [get_number({key: x}, key, f"{path}.{key}[{i}]", lo=lo, hi=hi, integer=True) for i, x in enumerate(v)]


def _float_list(cfg, key, path, lo=None, hi=None):
    v = cfg[key]
    if not isinstance(v, list) or not v:
        raise ConfigError(f"{path}.{key}", "expected a non-empty list")
    return [get_number({key: x}, key, f"{path}.{key}[{i}]", lo=lo, hi=hi) for i, x in enumerate(v)]


def _n_values(cfg, path, n_default, cap):
    if "n_values" in cfg:
        return sorted(set(_int_list(cfg, "n_values", path, 1, cap)))
    n_max = get_number(cfg, "n_max", path, n_default, 1, cap, integer=True)
    return geometric_grid(n_max).tolist()


# -- subcommands --------------------------------------------------------------

def cmd_rotno(cfg, rng) -> ResultRecord:
    """Birkhoff rotation-number estimates ``(n, estimate, bound)`` along one orbit."""
    check_fields(cfg, "config", ["map"], COMMON + ("n_max", "n_values", "x0"))
    f = parse_map(cfg["map"], "config.map", rng)
    ns = _n_values(cfg, "config", 10_000, MAX_N)
    x0 = get_number(cfg, "x0", "config", 0.0)
    x, winding = x0, 0.0
    rows = []
    j = 0
    for n in range(1, ns[-1] + 1):
        y = float(f.lift(x))
        m = np.floor(y)
        winding += m
        x = y - m
        if n == ns[j]:
            rows.append([n, (winding + x - x0) / n, 1.0 / n])
            j += 1
    return ResultRecord("rotno", "", ["n", "estimate", "bound"], rows,
                        summary={"estimate": rows[-1][1], "bound": rows[-1][2]})


def cmd_distortion(cfg, rng) -> ResultRecord:
    """``var(log Df^n)/n`` series; exact for PA and Moebius maps, partition lower bounds otherwise."""
    check_fields(cfg, "config", ["map"], COMMON + ("n_max", "n_values", "schedule", "cap"))
    f = parse_map(cfg["map"], "config.map", rng)
    ns = _n_values(cfg, "config", 200, MAX_DISTORTION_N)
    schedule = _schedule(cfg)
    if isinstance(f, PAMap):
        cap = get_number(cfg, "cap", "config", 200_000, 1, MAX_PA_CAP, integer=True)
        series = pa_var_sequence(f, ns[-1], cap=cap, keep=ns)
    else:
        if "cap" in cfg:
            raise ConfigError("config.cap", "break point caps apply only to piecewise-affine maps")
        series = asymptotic_distortion(f, max(ns[-1], 2), schedule, ns)
    rows = [list(r) for r in zip(series.n_values.tolist(), series.var_values.tolist(), series.per_n.tolist(),
                                  series.fekete_running.tolist(), series.converged.tolist())]
    ok = series.complete and bool(np.all(series.converged))
    return ResultRecord(
        "distortion", "", ["n", "var", "var_over_n", "fekete", "converged"], rows,
        flags={"complete": series.complete, "all_converged": bool(np.all(series.converged))},
        summary=series.summary(), exit_code=EXIT_OK if ok else EXIT_NONCONVERGED,
    )


def _rho_for(g, cfg, key, path):
    if key in cfg:
        return get_number(cfg, key, path)
    return rotation_estimate(g, 20_000)


def cmd_approximate(cfg, rng) -> ResultRecord:
    """Distance to the rotation of the conjugates produced by the chosen scheme."""
    check_fields(cfg, "config", ["scheme"], COMMON + (
        "map", "maps", "n_values", "t_values", "rho", "rhos", "grid", "schedule", "budget"))
    scheme = cfg["scheme"]
    if scheme not in ("mean", "path", "box", "orbit-mean"):
        raise ConfigError("config.scheme", f"unknown scheme {scheme!r} (known: mean, path, box, orbit-mean)")
    grid = get_number(cfg, "grid", "config", 4096, 64, MAX_GRID, integer=True)
    schedule = _schedule(cfg, default=Schedule(8, 16, 1e-7))
    if scheme == "box":
        if "map" in cfg:
            raise ConfigError("config.map", "scheme 'box' takes a list under 'maps'")
        if "maps" not in cfg or not isinstance(cfg["maps"], list) or not cfg["maps"]:
            raise ConfigError("config.maps", "scheme 'box' needs a non-empty list of generators")
        gens = [parse_map(m, f"config.maps[{i}]", rng) for i, m in enumerate(cfg["maps"])]
        if "rhos" in cfg:
            rhos = _float_list(cfg, "rhos", "config")
            if len(rhos) != len(gens):
                raise ConfigError("config.rhos", "need one rotation number per generator")
        else:
            rhos = [rotation_estimate(g, 20_000) for g in gens]
        budget = get_number(cfg, "budget", "config", 100_000, 1, MAX_BUDGET, integer=True)
        ns = sorted(set(_int_list(cfg, "n_values", "config", 1, MAX_N))) if "n_values" in cfg else [1, 2, 5, 10]
        rows = []
        for n in ns:
            h = box_conjugator(gens, n, grid, budget=budget)
            prox = [rotation_proximity(conjugate(h, g), r, schedule) for g, r in zip(gens, rhos)]
            rows.append([n, max(p.c0 for p in prox), max(p.dlog for p in prox), max(p.var for p in prox),
                         all(p.converged for p in prox)])
        return _approx_record(scheme, "n", rows)
    for key in ("maps", "rhos", "budget"):
        if key in cfg:
            raise ConfigError(f"config.{key}", f"not used by scheme {scheme!r}")
    if "map" not in cfg:
        raise ConfigError("config.map", "missing required field")
    f = parse_map(cfg["map"], "config.map", rng)
    rho = _rho_for(f, cfg, "rho", "config")
    if scheme == "path":
        if "n_values" in cfg:
            raise ConfigError("config.n_values", "scheme 'path' is indexed by t_values")
        ts = _float_list(cfg, "t_values", "config", 0.0, 0.999) if "t_values" in cfg else [0.0, 0.25, 0.5, 0.75, 0.9]
        rows = []
        for t in ts:
            p = rotation_proximity(conjugate(path_conjugator(f, t, grid=grid), f), rho, schedule)
            rows.append([t, p.c0, p.dlog, p.var, p.converged])
        return _approx_record(scheme, "t", rows)
    if "t_values" in cfg:
        raise ConfigError("config.t_values", f"not used by scheme {scheme!r}")
    ns = sorted(set(_int_list(cfg, "n_values", "config", 1, MAX_N))) if "n_values" in cfg else [1, 2, 5, 10, 20, 50]
    rows = []
    if scheme == "orbit-mean":
        # only C^0 information is meaningful for the averaged map
        for n in ns:
            h = orbit_mean_conjugator(f, n, rho, grid)
            rows.append([n, conjugacy_defect(f, h, rho)])
        return ResultRecord("approximate", "", ["n", "c0"], rows, summary={"scheme": scheme})
    for n in ns:
        p = rotation_proximity(conjugate(mean_conjugator(f, n, grid), f), rho, schedule)
        rows.append([n, p.c0, p.dlog, p.var, p.converged])
    return _approx_record(scheme, "n", rows)


def _approx_record(scheme, index, rows):
    conv = all(r[-1] for r in rows)
    return ResultRecord(
        "approximate", "", [index, "c0", "dlog", "var", "converged"], rows,
        flags={"all_converged": conv}, summary={"scheme": scheme},
        exit_code=EXIT_OK if conv else EXIT_NONCONVERGED,
    )


# -- named experiments --------------------------------------------------------

def canonical_config(name: str) -> dict:
    if name not in EXPERIMENTS:
        raise ConfigError("config.name", f"unknown experiment {name!r} (available: {', '.join(EXPERIMENTS)})")
    return json.loads(resources.files("circdist.configs").joinpath(f"{name}.json").read_text())


def cmd_experiment(cfg, rng) -> ResultRecord:
    name = cfg.get("name")
    if name not in EXPERIMENTS:
        raise ConfigError("config.name", f"unknown experiment {name!r} (available: {', '.join(EXPERIMENTS)})")
    return _EXPERIMENTS[name](cfg, rng)


def exp_mobius_table(cfg, rng) -> ResultRecord:
    """Partition TV of ``log Df`` for ``f(w) = (w - a)/(1 - conj(a) w)``, ``a = r e^{i phase}``, against ``4 log((1+r)/(1-r))``."""
    check_fields(cfg, "config", ["name"], COMMON + ("radii", "phase", "schedule"))
    # a generic phase keeps the extremes of log Df off the dyadic grid
    phase = get_number(cfg, "phase", "config", 1.0)
    radii = _float_list(cfg, "radii", "config", 0.0, 0.99) if "radii" in cfg else [k / 10 for k in range(1, 10)]
    schedule = _schedule(cfg, default=Schedule(10, 20, 1e-9))
    rows = []
    for r in radii:
        m = MobiusMap.from_disk(r * np.exp(1j * phase))
        closed = var_log_deriv_closed(m)
        est = total_variation_log_deriv(m, schedule)
        rows.append([r, closed, est.value, abs(est.value - closed) / closed if closed else 0.0, est.converged])
    worst = max(row[3] for row in rows)
    return ResultRecord("mobius-table", "", ["r", "closed_form", "numeric_tv", "rel_err", "converged"], rows,
                        flags={"all_converged": all(r[-1] for r in rows)}, summary={"max_rel_err": worst})


def exp_parabolic_patch(cfg, rng) -> ResultRecord:
    """Series ``var(log Df^n)/n`` for the modified parabolic map against the lower bound ``delta/2``."""
    check_fields(cfg, "config", ["name"], COMMON + ("a", "b", "tau", "bump", "n_max", "n_values", "schedule"))
    bump = cfg.get("bump")
    if bump is not None:
        check_fields(bump, "config.bump", [], ["width", "amplitude"])
    try:
        ex = parabolic_patch_build(get_number(cfg, "a", "config", 0.5),
                            get_number(cfg, "b", "config") if "b" in cfg else None,
                            bump, get_number(cfg, "tau", "config", 0.01))
    except ConstructionError as err:
        raise ConfigError("config", str(err)) from err
    ns = _n_values(cfg, "config", 200, MAX_DISTORTION_N)
    schedule = _schedule(cfg, default=Schedule(8, 14, 1e-6))
    sf = asymptotic_distortion(ex.f, max(ns[-1], 2), schedule, ns)
    sh = asymptotic_distortion(ex.fhat, max(ns[-1], 2), schedule, ns)
    rows = [list(r) for r in zip(sf.n_values.tolist(), sf.per_n.tolist(), sf.fekete_running.tolist(),
                                  [ex.delta / 2] * len(ns), sf.converged.tolist(), sh.per_n.tolist(),
                                  sh.converged.tolist())]
    return ResultRecord(
        "parabolic-patch", "",
        ["n", "var_over_n", "fekete", "lower_bound", "converged", "fhat_var_over_n", "fhat_converged"], rows,
        flags={"f_converged": bool(np.all(sf.converged)), "fhat_converged": bool(np.all(sh.converged)),
               "partition_values_are_lower_bounds": True},
        summary={"delta": ex.delta, "a": ex.a, "b": ex.b, "fekete_estimate": sf.fekete_estimate,
                 "fhat_final": float(sh.per_n[-1])},
    )


def exp_cantor(cfg, rng) -> ResultRecord:
    """Certified lower bounds of ``var(log Df^n)/n`` for a Cantor-weighted map and its ``c = 0`` control."""
    check_fields(cfg, "config", ["name"], COMMON + ("c", "control_c", "smoothing", "n_max", "depth", "schedule"))
    c = get_number(cfg, "c", "config", 0.5, -20, 20)
    c0 = get_number(cfg, "control_c", "config", 0.0, -20, 20)
    smoothing = _pairs(cfg["smoothing"], "config.smoothing") if "smoothing" in cfg else ((0.0, 0.1),)
    n_max = get_number(cfg, "n_max", "config", 100, 1, 2000, integer=True)
    depth = get_number(cfg, "depth", "config", 12, 1, 16, integer=True)
    schedule = _schedule(cfg, default=Schedule(10, 14, 1e-4))
    f = cantor_map_build(c, smoothing)
    g = cantor_map_build(c0, smoothing)
    ns = list(range(1, n_max + 1))
    sf = cantor_lower_bound(f, n_max, schedule, depth=depth, n_values=ns)
    sg = cantor_lower_bound(g, n_max, schedule, depth=depth, n_values=ns)
    rows = [list(r) for r in zip(ns, sf.per_n.tolist(), sf.fekete_running.tolist(), sg.per_n.tolist())]
    return ResultRecord(
        "cantor", "", ["n", "lower_bound_over_n", "running_min", "control_over_n"], rows,
        flags={"lower_bounds_certified": True, "f_converged": bool(np.all(sf.converged)),
               "control_converged": bool(np.all(sg.converged))},
        summary={"c": c, "control_c": c0, "min_lower_bound": float(np.min(sf.per_n)),
                 "control_final": float(sg.per_n[-1]), **sf.meta},
    )


def exp_pa_jump(cfg, rng) -> ResultRecord:
    """Per-break-point jumps, complete jumps and limit estimates for PA maps."""
    check_fields(cfg, "config", ["name"], COMMON + ("maps", "horizon", "n_max"))
    horizon = get_number(cfg, "horizon", "config", 200, 1, MAX_HORIZON, integer=True)
    n_max = get_number(cfg, "n_max", "config", 100, 1, 1000, integer=True)
    maps = cfg.get("maps", [{"kind": "pa_named", "name": "two_interval"}, {"kind": "pa_named", "name": "balanced"}])
    if not isinstance(maps, list) or not maps:
        raise ConfigError("config.maps", "expected a non-empty list")
    rows, summary = [], {}
    for i, desc in enumerate(maps):
        f = parse_map(desc, f"config.maps[{i}]", rng)
        if not isinstance(f, PAMap):
            raise ConfigError(f"config.maps[{i}]", "pa-jump needs piecewise-affine maps")
        label = desc.get("name", f"map{i}")
        for b in f.breakpoints:
            rep = pa_complete_jump(f, b, horizon)
            rows.append([label, str(b), str(rep.jump), str(rep.complete_jump),
                         abs(frac_log(rep.complete_jump)), rep.certified])
        class_sum, certified = pa_class_sum(f, horizon)
        limit = limit_estimate(f, n_max)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UncertifiedHorizonWarning)
            balanced = balance_predicate(f, horizon).balanced
        summary[label] = {"limit_estimate": limit, "class_sum": class_sum, "certified": certified,
                          "balanced": balanced}
    return ResultRecord("pa-jump", "",
                        ["map", "breakpoint", "jump", "complete_jump", "abs_log_complete_jump", "certified"], rows,
                        flags={"all_certified": all(r[-1] for r in rows)}, summary=summary)


def exp_box_decay(cfg, rng) -> ResultRecord:
    """``sup |D^2 g / Dg|`` of box-conjugated commuting generators for growing boxes."""
    check_fields(cfg, "config", ["name"], COMMON + ("rhos", "h_coefficients", "n_values", "grid"))
    rhos = _float_list(cfg, "rhos", "config") if "rhos" in cfg else None
    coeffs = _pairs(cfg["h_coefficients"], "config.h_coefficients") if "h_coefficients" in cfg else STANDARD_H
    gens = commuting_pair(*rhos, coefficients=coeffs) if rhos else commuting_pair(coefficients=coeffs)
    ns = sorted(set(_int_list(cfg, "n_values", "config", 1, 200))) if "n_values" in cfg else [3, 6, 12]
    grid = get_number(cfg, "grid", "config", 4096, 64, MAX_GRID, integer=True)
    rep = box_affine_decay(gens, ns, grid)
    rows = [[n, *vals, mx] for n, vals, mx in zip(rep.n_values, rep.sup_affine, rep.max_per_n)]
    cols = ["n"] + [f"sup_affine_g{i + 1}" for i in range(len(gens))] + ["max"]
    decreasing = all(b < a for a, b in zip(rep.max_per_n, rep.max_per_n[1:]))
    return ResultRecord("box-decay", "", cols, rows, flags={"decreasing": decreasing})


_EXPERIMENTS = {
    "parabolic-patch": exp_parabolic_patch, "cantor": exp_cantor, "mobius-table": exp_mobius_table,
    "pa-jump": exp_pa_jump, "box-decay": exp_box_decay,
}

COMMANDS = {
    "rotno": cmd_rotno, "distortion": cmd_distortion, "approximate": cmd_approximate, "experiment": cmd_experiment,
}


def run(command: str, cfg: dict, seed: int | None = None) -> ResultRecord:
    """Execute a subcommand on a parsed config; raises on errors (see ``main`` for exit codes)."""
    if "seed" in cfg:
        cfg_seed = get_number(cfg, "seed", "config", integer=True, lo=0)
        seed = cfg_seed if seed is None else seed
    rng = np.random.default_rng(0 if seed is None else seed)
    start = time.perf_counter()
    rec = COMMANDS[command](cfg, rng)
    rec.wall_clock = time.perf_counter() - start
    rec.config_hash = config_hash(cfg, seed)
    if command == "experiment":
        rec.experiment = cfg["name"]
    if "id" in cfg:
        if not isinstance(cfg["id"], str) or not cfg["id"] or "/" in cfg["id"]:
            raise ConfigError("config.id", "expected a plain file-name string")
        rec.experiment = cfg["id"]
    return rec


def write_outputs(rec: ResultRecord, out: Path):
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{rec.experiment}.csv").write_text(rec.to_csv())
    (out / f"{rec.experiment}.json").write_text(rec.to_json())


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="circdist", description="Distortion experiments for circle diffeomorphisms.")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--name", help="run the shipped config of a named experiment")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="random seed for random map descriptions")
    args = parser.parse_args(argv)
    try:
        if args.name is not None:
            if args.command != "experiment":
                raise ConfigError("--name", "only the experiment subcommand has shipped configs")
            cfg = canonical_config(args.name)
        elif args.config is None:
            raise ConfigError("--config", "a config file (or --name for experiments) is required")
        else:
            cfg = load_config(args.config)
        rec = run(args.command, cfg, args.seed)
    except (ConfigError, CommutativityError, UnsupportedVariantError, ConstructionError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceLimitError as err:
        print(f"resource cap: {err}", file=sys.stderr)
        return EXIT_RESOURCE
    except NumericFailure as err:
        print(f"numeric failure: {err}", file=sys.stderr)
        return EXIT_NONCONVERGED
    write_outputs(rec, Path(args.out))
    print(f"{rec.experiment}: {len(rec.rows)} rows -> {Path(args.out) / rec.experiment}.csv")
    if rec.exit_code == EXIT_NONCONVERGED:
        print("warning: some estimates did not converge; partial results written", file=sys.stderr)
    return rec.exit_code


if __name__ == "__main__":
    sys.exit(main())
