import json

import numpy as np
import pytest

from kinuq.cli import main, validate_config
from kinuq.io_utils import read_csv, sha256_file, write_csv
from kinuq.scenarios import REGISTRY
from kinuq.solvers import sod_initial

BUILTINS = {"homog-relax-mscv", "homog-mscv2", "sod-mscv", "sudden-heating",
            "mlmc-bgk", "swarming-sg", "particle-sg-align", "dsmc-sg-bkw"}

FAST_OVERRIDES = {
    "homog-relax-mscv": {"M": 4, "quad_nodes": 10, "nv": 16, "t_final": 1.0},
    "homog-mscv2": {"M": 4, "quad_nodes": 10, "nv": 16, "t_final": 0.5},
    "sod-mscv": {"M": 3, "quad_nodes": 5, "nx": 20, "nv": 16, "t_final": 0.02},
    "sudden-heating": {"quad_nodes": 4, "nx": 16, "nv": 16, "t_final": 0.05},
    "mlmc-bgk": {"counts": [20, 8, 3], "nv": 16, "t_final": 0.02,
                 "quad_nodes": 5},
    "swarming-sg": {"M_list": [0, 2], "M_ref": 6, "nv": 41, "t_final": 1.0},
    "particle-sg-align": {"N": 60, "S": 6, "t_final": 1.0},
    "dsmc-sg-bkw": {"N": 2000, "M": 2, "t_final": 1.0},
}


def write_config(tmp_path, name, seed=1):
    cfg = {"scenario": name, "seed": seed, "params": FAST_OVERRIDES[name]}
    path = tmp_path / f"{name}.json"
    path.write_text(json.dumps(cfg))
    return path


def test_registry_contains_builtins():
    assert BUILTINS <= set(REGISTRY)
    for name in BUILTINS:
        assert REGISTRY[name].description


def test_list_command(capsys):
    assert main(["list"]) == 0
    out = capsys.readouterr().out
    for name in BUILTINS:
        assert name in out


def test_dump_config_roundtrip(tmp_path, capsys):
    assert main(["--dump-config", "sudden-heating"]) == 0
    dumped = capsys.readouterr().out
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(dumped)
    cfg = json.loads(dumped)
    cfg["params"].update(FAST_OVERRIDES["sudden-heating"])
    cfg_path.write_text(json.dumps(cfg))
    code = main(["run", str(cfg_path), "--out", str(tmp_path / "out")])
    assert code == 0
    assert (tmp_path / "out" / "heating_profiles.csv").exists()


def test_dump_config_unknown():
    assert main(["--dump-config", "nope"]) == 2


@pytest.mark.parametrize("name", sorted(BUILTINS))
def test_every_builtin_runs_and_manifests(name, tmp_path):
    cfg = write_config(tmp_path, name)
    out = tmp_path / "out"
    assert main(["run", str(cfg), "--out", str(out), "--threads", "2"]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["scenario"] == name
    assert manifest["files"], "no artifacts recorded"
    for entry in manifest["files"]:
        path = out / entry["name"]
        assert path.exists()
        assert sha256_file(path) == entry["sha256"]
    # no orphan CSVs beside the manifest
    listed = {e["name"] for e in manifest["files"]}
    on_disk = {p.name for p in out.iterdir()} - {"manifest.json"}
    assert on_disk == listed


def test_run_is_deterministic(tmp_path):
    cfg = write_config(tmp_path, "homog-relax-mscv")
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", str(cfg), "--out", str(a)]) == 0
    assert main(["run", str(cfg), "--out", str(b)]) == 0
    assert (a / "mscv_error.csv").read_bytes() == (b / "mscv_error.csv").read_bytes()


def test_run_thread_count_invariant(tmp_path):
    cfg = write_config(tmp_path, "sod-mscv")
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", str(cfg), "--out", str(a), "--threads", "1"]) == 0
    assert main(["run", str(cfg), "--out", str(b), "--threads", "4"]) == 0
    assert (a / "sod_density.csv").read_bytes() == (b / "sod_density.csv").read_bytes()


def test_seed_flag_overrides_config(tmp_path):
    cfg = write_config(tmp_path, "dsmc-sg-bkw", seed=1)
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", str(cfg), "--out", str(a), "--seed", "2"]) == 0
    assert main(["run", str(cfg), "--out", str(b)]) == 0
    assert (a / "dsmc_m4.csv").read_bytes() != (b / "dsmc_m4.csv").read_bytes()


def test_out_env_var(tmp_path, monkeypatch):
    cfg = write_config(tmp_path, "particle-sg-align")
    target = tmp_path / "envout"
    monkeypatch.setenv("KINUQ_OUT", str(target))
    assert main(["run", str(cfg)]) == 0
    assert (target / "alignment_variance.csv").exists()


def test_sod_builtin_encodes_uncertain_temperatures():
    p = REGISTRY["sod-mscv"].defaults
    assert p["s"] == 0.25
    x, rho, u, T = sod_initial(0.5, 8, s=p["s"])
    assert np.allclose(rho, [1, 1, 1, 1, 0.125, 0.125, 0.125, 0.125])
    assert np.allclose(T[:4], 1.125)
    assert np.allclose(T[4:], 0.925)


def test_sudden_heating_builtin_wall_temperature():
    p = REGISTRY["sudden-heating"].defaults
    Tw = p["Tw_scale"] * (p["T0"] + p["s"] * 0.5)
    assert Tw == pytest.approx(2.0 * (1.0 + 0.2 * 0.5))


def test_validate_reports_all_issues():
    issues = validate_config({
        "scenario": "particle-sg-align",
        "params": {"S": 999, "M": 0},
    })
    assert len(issues) == 2
    joined = " ".join(issues)
    assert "S=999" in joined and "N=200" in joined
    assert "M" in joined


def test_validate_unknown_scenario_and_keys():
    assert any("unknown scenario" in m for m in validate_config({"scenario": "x"}))
    issues = validate_config({"scenario": "sod-mscv", "params": {"bogus": 1}})
    assert any("unknown keys" in m for m in issues)


def test_validate_cfl_bound_printed():
    issues = validate_config({
        "scenario": "sod-mscv",
        "params": {"dt": 1.0},
    })
    assert any("CFL" in m and "dx/vmax" in m for m in issues)


def test_validate_warning_does_not_fail(tmp_path):
    cfg = tmp_path / "w.json"
    cfg.write_text(json.dumps({
        "scenario": "dsmc-sg-bkw",
        "params": {"N": 99, "M": 2, "t_final": 0.5},
    }))
    assert main(["validate", str(cfg)]) == 0


def test_validate_error_exit_code(tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"scenario": "mlmc-bgk",
                               "params": {"counts": [10, 20, 5]}}))
    assert main(["validate", str(cfg)]) == 2


def test_run_refuses_invalid_config(tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"scenario": "particle-sg-align",
                               "params": {"S": 10000}}))
    assert main(["run", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert not (tmp_path / "o" / "alignment_variance.csv").exists()


def test_csv_roundtrip(tmp_path):
    path = tmp_path / "t.csv"
    write_csv(path, {"a": [1.0, 0.1 + 0.2], "b": [3, 4]})
    back = read_csv(path)
    assert back["a"][1] == 0.1 + 0.2  # bit-exact float round trip
    assert np.array_equal(back["b"], [3.0, 4.0])
    with pytest.raises(ValueError):
        write_csv(path, {"a": [1.0], "b": [1.0, 2.0]})
