import json

import pytest

from dpboot.cli import cli_main, load_config


def test_moments_subcommand(capsys):
    rc = cli_main(["moments", "--mu", "0", "--var", "4", "--lo", "-6", "--hi", "4"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "-0.10" in out
    assert "3.49" in out
    assert "-0.05" in out


def test_missing_config_file_exits_1(capsys):
    rc = cli_main(["run", "--config", "missing.toml"])
    assert rc == 1
    assert "missing.toml" in capsys.readouterr().err


def test_unknown_flag_exits_2(capsys):
    rc = cli_main(["run", "--config", "mean_small", "--bogus"])
    assert rc == 2


def test_unknown_subcommand_exits_2():
    assert cli_main(["frobnicate"]) == 2


def test_run_preset_twice_is_byte_identical(tmp_path, capsys):
    small = {
        "name": "tiny",
        "task": "mean",
        "n_grid": [200],
        "eps_total": 8.0,
        "n_trials": 2,
        "n_resamp": 20,
        "methods": ["blbquant"],
        "blb": {"K": 8.0, "c": 1.0, "sigma_max_sq": 8725.0},
        "data": {"kind": "truncated_gaussian", "mu": 0.0, "var": 4.0, "lo": -6.0, "hi": 4.0},
        "master_seed": 0,
    }
    cfg_path = tmp_path / "tiny.json"
    cfg_path.write_text(json.dumps(small))
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    assert cli_main(["run", "--config", str(cfg_path), "--seed", "7", "--out", str(out1)]) == 0
    assert cli_main(["run", "--config", str(cfg_path), "--seed", "7", "--out", str(out2)]) == 0
    for name in ("tiny_seed7_trials.csv", "tiny_seed7_report.json"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_out_dir_env_override(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("DPBOOT_OUT", str(tmp_path / "envout"))
    cfg = {
        "name": "envtest",
        "task": "mean",
        "n_grid": [150],
        "eps_total": 8.0,
        "n_trials": 1,
        "n_resamp": 10,
        "methods": ["nonprivate"],
        "blb": {},
        "data": {"kind": "truncated_gaussian"},
        "master_seed": 0,
    }
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(cfg))
    assert cli_main(["run", "--config", str(p)]) == 0
    assert (tmp_path / "envout" / "envtest_seed0_trials.csv").exists()


def test_report_subcommand_roundtrip(tmp_path, capsys):
    cfg = {
        "name": "rep",
        "task": "mean",
        "n_grid": [150],
        "eps_total": 8.0,
        "n_trials": 2,
        "n_resamp": 10,
        "methods": ["nonprivate"],
        "blb": {},
        "data": {"kind": "truncated_gaussian"},
        "master_seed": 0,
    }
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(cfg))
    assert cli_main(["run", "--config", str(p), "--out", str(tmp_path)]) == 0
    capsys.readouterr()
    rc = cli_main(["report", "--records", str(tmp_path / "rep_seed0_trials.csv"), "--json"])
    assert rc == 0
    cells = json.loads(capsys.readouterr().out)["cells"]
    assert cells[0]["n_trials"] == 2


def test_preset_names_resolve():
    cfg = load_config("mean_small")
    assert cfg.task == "mean"
    with pytest.raises(FileNotFoundError):
        load_config("not_a_preset")


def test_ablate_runs_smallest_grid(tmp_path, capsys):
    cfg = {
        "name": "abl",
        "task": "mean",
        "n_grid": [150],
        "eps_total": 8.0,
        "n_trials": 1,
        "n_resamp": 10,
        "methods": ["blbvar"],
        "blb": {"K": 10.0, "sigma_max_sq": 8725.0},
        "data": {"kind": "truncated_gaussian"},
        "master_seed": 0,
    }
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(cfg))
    rc = cli_main(
        ["ablate", "--config", str(p), "--ks", "10", "--cs", "1", "--rs", "10,50",
         "--out", str(tmp_path)]
    )
    assert rc == 0
    assert (tmp_path / "abl_K10_c1_R10_seed0_report.json").exists()
    assert (tmp_path / "abl_K10_c1_R50_seed0_report.json").exists()
