import csv
import json
import math
from importlib import resources

import pytest

from circdist.catalog import conjugated_rotation
from circdist.cli import EXPERIMENTS, main
from circdist.distortion import Schedule, var_log_deriv_iterate
from circdist.maps import GOLDEN

H = {"kind": "fourier", "coefficients": [[0.03, 0.02], [0.0, 0.01]]}


def conj(rho):
    return {"kind": "conjugate", "h": H, "f": {"kind": "rotation", "rho": rho}}


def run(tmp_path, command, cfg, *extra, name="cfg.json"):
    path = tmp_path / name
    path.write_text(cfg if isinstance(cfg, str) else json.dumps(cfg))
    out = tmp_path / "out"
    code = main([command, "--config", str(path), "--out", str(out), *extra])
    return code, out


def rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_rotno_rotation(tmp_path):
    code, out = run(tmp_path, "rotno", {"schema": 1, "map": {"kind": "rotation", "rho": 0.3}, "n_max": 500})
    assert code == 0
    last = rows(out / "rotno.csv")[-1]
    assert float(last["estimate"]) == pytest.approx(0.3, abs=1e-12)
    assert last["n"] == "500"


def test_rotno_conjugated_rotation(tmp_path):
    code, out = run(tmp_path, "rotno", {"schema": 1, "map": conj(GOLDEN), "n_max": 2000})
    assert code == 0
    last = rows(out / "rotno.csv")[-1]
    assert abs(float(last["estimate"]) - GOLDEN) <= float(last["bound"])


def test_malformed_json_names_line(tmp_path, capsys):
    code, _ = run(tmp_path, "rotno", '{"schema": 1,\n "map": {"kind": "rotation" "rho": 0.3}}')
    assert code == 2
    assert "line 2" in capsys.readouterr().err


def test_unknown_field_is_named(tmp_path, capsys):
    cfg = {"schema": 1, "map": {"kind": "fourier", "coefficients": [[0.1, 0]], "mean_shif": 0.3}}
    code, _ = run(tmp_path, "distortion", cfg)
    assert code == 2
    assert "config.map.mean_shif" in capsys.readouterr().err


def test_schema_and_caps(tmp_path, capsys):
    assert run(tmp_path, "rotno", {"map": {"kind": "rotation", "rho": 0.3}})[0] == 2
    code, _ = run(tmp_path, "rotno", {"schema": 1, "map": {"kind": "rotation", "rho": 0.3}, "n_max": 10**9})
    assert code == 2
    assert "hard cap" in capsys.readouterr().err


def test_distortion_mobius_hyperbolic(tmp_path):
    cfg = {"schema": 1, "map": {"kind": "mobius", "matrix": [[2, 0], [0, 0.5]]}, "n_max": 200}
    code, out = run(tmp_path, "distortion", cfg)
    assert code == 0
    summary = json.loads((out / "distortion.json").read_text())["summary"]
    assert summary["source"] == "closed_mobius"
    assert summary["fekete_estimate"] == pytest.approx(8 * math.log(2), rel=0.01)


def test_distortion_pa(tmp_path):
    cfg = {"schema": 1, "map": {"kind": "pa", "pieces": [
        {"breakpoint": 0, "value": "2/11", "slope": 2}, {"breakpoint": "1/3", "value": "28/33", "slope": "1/2"}]},
        "n_max": 100}
    code, out = run(tmp_path, "distortion", cfg)
    assert code == 0
    summary = json.loads((out / "distortion.json").read_text())["summary"]
    assert summary["source"] == "exact_pa"
    assert summary["fekete_estimate"] == pytest.approx(4 * math.log(2), abs=1e-6)


def test_distortion_rotation_zero(tmp_path):
    cfg = {"schema": 1, "map": {"kind": "rotation", "rho": 0.3}, "n_max": 50,
           "schedule": {"min_level": 6, "max_level": 8}}
    code, out = run(tmp_path, "distortion", cfg)
    assert code == 0
    assert all(float(r["var"]) == 0 for r in rows(out / "distortion.csv"))


def test_nonconvergence_exit_code_with_partial_output(tmp_path):
    cfg = {"schema": 1, "map": conj(GOLDEN), "n_values": [1, 2],
           "schedule": {"min_level": 4, "max_level": 4}}
    code, out = run(tmp_path, "distortion", cfg)
    assert code == 3
    assert len(rows(out / "distortion.csv")) == 2
    assert json.loads((out / "distortion.json").read_text())["flags"]["all_converged"] is False


def test_resource_cap_exit_code(tmp_path):
    cfg = {"schema": 1, "map": {"kind": "pa_named", "name": "two_interval"}, "n_max": 100, "cap": 50}
    assert run(tmp_path, "distortion", cfg)[0] == 4


def test_approximate_mean_var_column(tmp_path):
    cfg = {"schema": 1, "scheme": "mean", "map": conj(GOLDEN), "rho": GOLDEN, "n_values": [1, 4], "grid": 2048}
    code, out = run(tmp_path, "approximate", cfg)
    assert code == 0
    f = conjugated_rotation()
    for r in rows(out / "approximate.csv"):
        n = int(r["n"])
        ref = var_log_deriv_iterate(f, n, Schedule(8, 16, 1e-9)).value / n
        assert float(r["var"]) == pytest.approx(ref, rel=1e-5)


def test_approximate_orbit_mean_on_rotation(tmp_path):
    cfg = {"schema": 1, "scheme": "orbit-mean", "map": {"kind": "rotation", "rho": 0.3}, "rho": 0.3,
           "n_values": [1, 5, 20]}
    code, out = run(tmp_path, "approximate", cfg)
    assert code == 0
    assert all(abs(float(r["c0"])) < 1e-12 for r in rows(out / "approximate.csv"))


def test_approximate_box_and_path(tmp_path):
    cfg = {"schema": 1, "scheme": "box", "maps": [conj(GOLDEN), conj(math.sqrt(2) - 1)],
           "rhos": [GOLDEN, math.sqrt(2) - 1], "n_values": [1, 3, 6], "grid": 2048}
    code, out = run(tmp_path, "approximate", cfg)
    assert code == 0
    v = [float(r["var"]) for r in rows(out / "approximate.csv")]
    assert v[0] > v[1] > v[2]
    cfg = {"schema": 1, "scheme": "path", "map": conj(GOLDEN), "t_values": [0.0, 0.75], "grid": 1024}
    code, out = run(tmp_path, "approximate", cfg, name="p.json")
    assert code == 0
    v = [float(r["var"]) for r in rows(out / "approximate.csv")]
    assert v[1] < v[0]


def test_approximate_errors(tmp_path):
    cfg = {"schema": 1, "scheme": "box", "maps": [conj(GOLDEN), {"kind": "fourier", "coefficients": [[0.03, 0]]}],
           "n_values": [2]}
    assert run(tmp_path, "approximate", cfg)[0] == 2
    cfg = {"schema": 1, "scheme": "mean", "map": {"kind": "pa_named", "name": "two_interval"}, "n_values": [2]}
    assert run(tmp_path, "approximate", cfg)[0] == 2
    cfg = {"schema": 1, "scheme": "box", "map": conj(GOLDEN)}
    assert run(tmp_path, "approximate", cfg)[0] == 2


def test_determinism_and_seed(tmp_path):
    cfg = {"schema": 1, "map": {"kind": "random_fourier", "modes": 2}, "n_max": 300}
    _, out = run(tmp_path, "rotno", cfg, "--seed", "5")
    first = (out / "rotno.csv").read_bytes()
    _, out = run(tmp_path, "rotno", cfg, "--seed", "5")
    assert (out / "rotno.csv").read_bytes() == first
    _, out = run(tmp_path, "rotno", cfg, "--seed", "6")
    assert (out / "rotno.csv").read_bytes() != first
    record = json.loads((out / "rotno.json").read_text())
    assert len(record["config_sha256"]) == 64 and record["wall_clock_s"] >= 0


def test_unknown_experiment(tmp_path, capsys):
    assert main(["experiment", "--name", "nope", "--out", str(tmp_path)]) == 2
    assert "mobius-table" in capsys.readouterr().err


def test_shipped_configs_exist_and_parse():
    for name in EXPERIMENTS:
        cfg = json.loads(resources.files("circdist.configs").joinpath(f"{name}.json").read_text())
        assert cfg["schema"] == 1 and cfg["name"] == name


@pytest.mark.parametrize("name", ["pa-jump", "mobius-table", "box-decay"])
def test_quick_experiments(tmp_path, name):
    assert main(["experiment", "--name", name, "--out", str(tmp_path)]) == 0
    assert (tmp_path / f"{name}.csv").exists()


def test_pa_jump_table(tmp_path):
    main(["experiment", "--name", "pa-jump", "--out", str(tmp_path)])
    table = rows(tmp_path / "pa-jump.csv")
    two = [r for r in table if r["map"] == "two_interval"]
    assert {r["complete_jump"] for r in two} == {"4", "1/4"}
    summary = json.loads((tmp_path / "pa-jump.json").read_text())["summary"]
    assert summary["two_interval"]["limit_estimate"] == pytest.approx(4 * math.log(2), rel=1e-12)
    assert summary["balanced"]["balanced"] is True
