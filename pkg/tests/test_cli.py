import copy
import json
import os

import numpy as np
import pytest

from predopt.cli import ConfigError, load_config, main

SMALL_CONFIG = {
    "seed": 3,
    "problem": {
        "kind": "newsvendor",
        "base_weights": [2.0, -1.0],
        "intercept": 12.0,
        "action_effect": 0.0,
        "nonlinearity": 0.0,
        "noise_sd": 1.0,
        "feature_sd": 1.0,
        "cost_params": {"c_h": 1.0, "c_s": 3.0},
        "logging": {"policy": "uniform"},
        "grid": {"z_min": 0.0, "z_max": 20.0, "n_points": 41},
        "n_samples": 100,
        "train_frac": 0.6,
        "val_frac": 0.2,
    },
    "model": {"kind": "linear"},
    "train": {
        "learning_rate": 0.004,
        "batch_size": 0,
        "max_iters": 60,
        "tol": 1e-9,
        "patience": 20,
        "weights": {"alpha": 1.0, "beta": 20.0, "tau": 1.0, "task_term_enabled": True},
    },
    "eval": {"n_mc": 2000, "n_seeds": 2},
    "io": {"out_dir": "results"},
}


@pytest.fixture
def config_path(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(SMALL_CONFIG, indent=2))
    return path


def _write(tmp_path, blob, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(blob, indent=2))
    return path


# --- config parsing ------------------------------------------------------------


def test_load_config_round_trip(config_path):
    cfg = load_config(config_path)
    assert cfg.model_spec.kind == "newsvendor"
    assert cfg.grid.n_points == 41
    assert cfg.train.weight_config.alpha == 1.0
    assert cfg.n_seeds == 2


def test_unknown_key_rejected_with_name_and_line(tmp_path, capsys):
    blob = copy.deepcopy(SMALL_CONFIG)
    blob["train"]["weights"]["alpah"] = 2.0
    del blob["train"]["weights"]["alpha"]
    path = _write(tmp_path, blob)
    rc = main(["compare", "--config", str(path), "--out", str(tmp_path / "r.csv")])
    assert rc == 2
    err = capsys.readouterr().err
    assert "alpah" in err


def test_unknown_top_level_key_rejected(tmp_path):
    blob = copy.deepcopy(SMALL_CONFIG)
    blob["problems"] = {}
    with pytest.raises(ConfigError, match="problems"):
        load_config(_write(tmp_path, blob))


def test_missing_required_key_rejected(tmp_path):
    blob = copy.deepcopy(SMALL_CONFIG)
    del blob["problem"]["grid"]
    with pytest.raises(ConfigError, match="grid"):
        load_config(_write(tmp_path, blob))


def test_invalid_json_is_config_error(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text('{"seed": }')
    rc = main(["generate", "--config", str(path), "--out", str(tmp_path / "d.csv")])
    assert rc == 2


def test_bad_value_is_config_error(tmp_path):
    blob = copy.deepcopy(SMALL_CONFIG)
    blob["problem"]["grid"]["n_points"] = 1
    with pytest.raises(ConfigError):
        load_config(_write(tmp_path, blob))


def test_missing_method_flag_exits_2(config_path, tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["train", "--config", str(config_path), "--out", str(tmp_path / "out")])
    assert exc.value.code == 2


# --- generate -------------------------------------------------------------------


def test_generate_writes_csv_and_sidecar(config_path, tmp_path, capsys):
    out = tmp_path / "data.csv"
    assert main(["generate", "--config", str(config_path), "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 101  # header + n_samples
    assert lines[0] == "x0,x1,z_obs,y"
    meta = json.loads((tmp_path / "data.meta.json").read_text())
    assert meta["seed"] == 3
    assert meta["model"]["kind"] == "newsvendor"


def test_generate_deterministic(config_path, tmp_path):
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["generate", "--config", str(config_path), "--out", str(out1)])
    main(["generate", "--config", str(config_path), "--out", str(out2)])
    assert out1.read_bytes() == out2.read_bytes()
    assert (tmp_path / "a.meta.json").read_text().replace("a.csv", "b.csv") == (
        tmp_path / "b.meta.json"
    ).read_text().replace("b.csv", "b.csv")


def test_seed_override_changes_data(config_path, tmp_path):
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["generate", "--config", str(config_path), "--out", str(out1)])
    main(["generate", "--config", str(config_path), "--out", str(out2), "--seed", "99"])
    assert out1.read_bytes() != out2.read_bytes()


def test_no_temp_files_left_behind(config_path, tmp_path):
    main(["generate", "--config", str(config_path), "--out", str(tmp_path / "d.csv")])
    leftovers = [p for p in os.listdir(tmp_path) if p.startswith(".tmp-")]
    assert leftovers == []


# --- train ----------------------------------------------------------------------


def test_train_two_stage_zero_noise_matches_grid_oracle(tmp_path):
    # no noise and no action effect: the fitted linear model reproduces the
    # outcome map, so the summary decision must match the oracle grid scan
    blob = copy.deepcopy(SMALL_CONFIG)
    blob["problem"]["noise_sd"] = 1e-9
    blob["problem"]["n_samples"] = 400
    blob["train"]["max_iters"] = 4000
    blob["train"]["learning_rate"] = 0.004
    path = _write(tmp_path, blob)
    out = tmp_path / "run"
    assert main(["train", "--config", str(path), "--method", "two-stage", "--out", str(out)]) == 0
    summary = json.loads((out / "summary.json").read_text())

    from predopt.cli import load_config
    from predopt.problems import oracle_action

    cfg = load_config(path)
    z_or, _ = oracle_action(cfg.model_spec, cfg.grid, n_mc=100000, seed=7)
    assert abs(summary["z_star"] - z_or) <= 2 * cfg.grid.step + 1e-12
    log_lines = (out / "training_log.csv").read_text().splitlines()
    assert log_lines[0] == "iter,F,pred_term,task_term,omega,gamma,z_star_test"
    assert len(log_lines) == summary["iters_run"] + 1
    ckpt = json.loads((out / "checkpoint.json").read_text())
    assert len(ckpt["weights"]) == 4  # d + 2


def test_train_simpo_reduction_matches_two_stage(config_path, tmp_path):
    blob = copy.deepcopy(SMALL_CONFIG)
    blob["train"]["weights"] = {
        "alpha": 0.0,
        "beta": 20.0,
        "tau": 1.0,
        "task_term_enabled": False,
    }
    path = _write(tmp_path, blob)
    out_a, out_b = tmp_path / "simpo", tmp_path / "two_stage"
    assert main(["train", "--config", str(path), "--method", "simpo", "--out", str(out_a)]) == 0
    assert main(["train", "--config", str(path), "--method", "two-stage", "--out", str(out_b)]) == 0
    sa = json.loads((out_a / "summary.json").read_text())
    sb = json.loads((out_b / "summary.json").read_text())
    assert sa["z_star"] == sb["z_star"]
    assert sa["g_star"] == sb["g_star"]
    assert sa["iters_run"] == sb["iters_run"]
    ca = json.loads((out_a / "checkpoint.json").read_text())
    cb = json.loads((out_b / "checkpoint.json").read_text())
    assert ca["weights"] == cb["weights"]


def test_train_abort_exits_3(tmp_path, capsys):
    blob = copy.deepcopy(SMALL_CONFIG)
    blob["train"]["learning_rate"] = 1e9
    blob["train"]["max_iters"] = 200
    blob["train"]["patience"] = 200
    path = _write(tmp_path, blob)
    with np.errstate(over="ignore"):
        rc = main(["train", "--config", str(path), "--method", "two-stage", "--out", str(tmp_path / "o")])
    assert rc == 3
    assert "iteration" in capsys.readouterr().err


# --- evaluate -------------------------------------------------------------------


def test_evaluate_checkpoint(config_path, tmp_path, capsys):
    out = tmp_path / "run"
    main(["train", "--config", str(config_path), "--method", "two-stage", "--out", str(out)])
    report_path = tmp_path / "report.json"
    rc = main(
        [
            "evaluate",
            "--config",
            str(config_path),
            "--checkpoint",
            str(out / "checkpoint.json"),
            "--out",
            str(report_path),
        ]
    )
    assert rc == 0
    report = json.loads(report_path.read_text())
    assert set(report) == {"chosen_action", "expected_cost", "regret"}
    assert report["regret"] >= 0.0


# --- compare --------------------------------------------------------------------


def test_compare_rows_and_determinism(config_path, tmp_path, capsys):
    out1, out2 = tmp_path / "r1.csv", tmp_path / "r2.csv"
    assert main(["compare", "--config", str(config_path), "--out", str(out1)]) == 0
    table = capsys.readouterr().out
    assert "oracle" in table and "simpo" in table and "two_stage" in table
    lines = out1.read_text().splitlines()
    assert len(lines) == 1 + 3 * SMALL_CONFIG["eval"]["n_seeds"]
    assert main(["compare", "--config", str(config_path), "--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    oracle_rows = [ln for ln in lines[1:] if ln.startswith("oracle")]
    for row in oracle_rows:
        assert float(row.split(",")[5]) == 0.0
