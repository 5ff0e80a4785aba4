"""Command-line entry point: generate / train / evaluate / compare.

One JSON config fully determines an experiment. Parsing is strict: unknown
keys are rejected by name (and line, when it can be located in the file).
Exit codes: 0 success, 2 usage or config error, 3 runtime/training error.
All output files are written to a temporary name and atomically renamed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import dataclass, replace

import numpy as np

from .core import ActionGrid, ValidationError, WeightConfig, make_grid, save_dataset_csv, split_dataset
from .evaluation import (
    compare_methods,
    derive_seeds,
    evaluate_decision,
    write_results_csv,
)
from .objective import argmin_profile, model_profile
from .predictor import Architecture, load_checkpoint, save_checkpoint
from .problems import TrueModel, gen_dataset, model_to_json, problem_from_model
from .training import TrainConfig, TrainingError, save_history_csv, simpo_fit, two_stage_fit

__all__ = ["main", "ExperimentConfig", "ConfigError", "load_config"]


class ConfigError(ValueError):
    """A config file failed strict validation."""


@dataclass(frozen=True)
class ExperimentConfig:
    model_spec: TrueModel
    grid: ActionGrid
    n_samples: int
    train_frac: float
    val_frac: float
    arch: Architecture
    train: TrainConfig
    n_mc: int
    n_seeds: int
    out_dir: str
    seed: int


# key -> (required, expected type(s)); nested dicts hold their own schema
_NUMBER = (int, float)
_SCHEMA = {
    "seed": (True, int),
    "problem": (
        True,
        {
            "kind": (True, str),
            "base_weights": (True, list),
            "intercept": (True, _NUMBER),
            "action_effect": (True, _NUMBER),
            "nonlinearity": (True, _NUMBER),
            "noise_sd": (True, _NUMBER),
            "feature_sd": (True, _NUMBER),
            "cost_params": (
                True,
                {
                    "c_h": (False, _NUMBER),
                    "c_s": (False, _NUMBER),
                    "capacity": (False, _NUMBER),
                },
            ),
            "logging": (
                True,
                {
                    "policy": (True, str),
                    "center": (False, _NUMBER),
                    "width": (False, _NUMBER),
                },
            ),
            "grid": (
                True,
                {
                    "z_min": (True, _NUMBER),
                    "z_max": (True, _NUMBER),
                    "n_points": (True, int),
                },
            ),
            "n_samples": (True, int),
            "train_frac": (True, _NUMBER),
            "val_frac": (True, _NUMBER),
        },
    ),
    "model": (
        True,
        {
            "kind": (True, str),
            "hidden_units": (False, int),
        },
    ),
    "train": (
        True,
        {
            "learning_rate": (True, _NUMBER),
            "batch_size": (False, int),
            "max_iters": (True, int),
            "tol": (False, _NUMBER),
            "patience": (False, int),
            "weights": (
                True,
                {
                    "alpha": (True, _NUMBER),
                    "beta": (True, _NUMBER),
                    "tau": (True, _NUMBER),
                    "task_term_enabled": (False, bool),
                },
            ),
        },
    ),
    "eval": (
        True,
        {
            "n_mc": (True, int),
            "n_seeds": (True, int),
        },
    ),
    "io": (
        True,
        {
            "out_dir": (False, str),
        },
    ),
}


def _find_line(raw_text: str, key: str):
    needle = f'"{key}"'
    for lineno, line in enumerate(raw_text.split("\n"), start=1):
        if needle in line:
            return lineno
    return None


def _check_keys(blob: dict, schema: dict, raw_text: str, path: str = "") -> None:
    for key, value in blob.items():
        where = f"{path}{key}"
        if key not in schema:
            lineno = _find_line(raw_text, key)
            at = f" (line {lineno})" if lineno else ""
            raise ConfigError(f"unknown config key '{where}'{at}")
        _required, expected = schema[key]
        if isinstance(expected, dict):
            if not isinstance(value, dict):
                raise ConfigError(f"config key '{where}' must be an object")
            _check_keys(value, expected, raw_text, path=where + ".")
        else:
            if expected is int and isinstance(value, bool):
                raise ConfigError(f"config key '{where}' must be an integer")
            if not isinstance(value, expected):
                raise ConfigError(f"config key '{where}' has the wrong type")
    for key, (required, _expected) in schema.items():
        if required and key not in blob:
            raise ConfigError(f"missing config key '{path}{key}'")


def load_config(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            raw_text = fh.read()
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from err
    try:
        blob = json.loads(raw_text)
    except json.JSONDecodeError as err:
        raise ConfigError(f"{path} is not valid JSON: {err}") from err
    if not isinstance(blob, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    _check_keys(blob, _SCHEMA, raw_text)

    p = blob["problem"]
    try:
        model = TrueModel(
            kind=p["kind"],
            base_weights=tuple(p["base_weights"]),
            intercept=float(p["intercept"]),
            action_effect=float(p["action_effect"]),
            nonlinearity=float(p["nonlinearity"]),
            noise_sd=float(p["noise_sd"]),
            feature_sd=float(p["feature_sd"]),
            cost_params=p["cost_params"],
            logging=p["logging"],
        )
        grid = make_grid(p["grid"]["z_min"], p["grid"]["z_max"], p["grid"]["n_points"])
        arch = Architecture(
            kind=blob["model"]["kind"],
            feature_dim=model.feature_dim,
            hidden_units=blob["model"].get("hidden_units", 0),
        )
        t = blob["train"]
        w = t["weights"]
        train = TrainConfig(
            weight_config=WeightConfig(
                alpha=float(w["alpha"]),
                beta=float(w["beta"]),
                tau=float(w["tau"]),
                task_term_enabled=bool(w.get("task_term_enabled", True)),
            ),
            learning_rate=float(t["learning_rate"]),
            batch_size=int(t.get("batch_size", 0)),
            max_iters=int(t["max_iters"]),
            tol=float(t.get("tol", 1e-6)),
            patience=int(t.get("patience", 10)),
            seed=int(blob["seed"]),
        )
    except ValidationError as err:
        raise ConfigError(str(err)) from err
    return ExperimentConfig(
        model_spec=model,
        grid=grid,
        n_samples=int(p["n_samples"]),
        train_frac=float(p["train_frac"]),
        val_frac=float(p["val_frac"]),
        arch=arch,
        train=train,
        n_mc=int(blob["eval"]["n_mc"]),
        n_seeds=int(blob["eval"]["n_seeds"]),
        out_dir=blob["io"].get("out_dir", "."),
        seed=int(blob["seed"]),
    )


def _atomic_via_tmp(path, writer) -> None:
    """Run writer(tmp_path) next to `path`, then rename into place."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    os.close(fd)
    try:
        writer(tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _atomic_write_text(path, text: str) -> None:
    def writer(tmp):
        with open(tmp, "w", newline="") as fh:
            fh.write(text)

    _atomic_via_tmp(path, writer)


def _sidecar_path(out_path: str) -> str:
    stem, _ext = os.path.splitext(out_path)
    return stem + ".meta.json"


def cmd_generate(config: ExperimentConfig, out_path: str) -> int:
    data_seed, _, _, _ = derive_seeds(config.seed)
    data = gen_dataset(config.model_spec, config.n_samples, config.grid, data_seed)
    _atomic_via_tmp(out_path, lambda tmp: save_dataset_csv(data, tmp))
    meta = {"model": model_to_json(config.model_spec), "seed": config.seed, "data_seed": data_seed}
    _atomic_write_text(_sidecar_path(out_path), json.dumps(meta, indent=2) + "\n")
    print(f"wrote {len(data)} samples to {out_path}")
    return 0


def _fit_once(config: ExperimentConfig, method: str):
    data_seed, split_seed, train_seed, _ = derive_seeds(config.seed)
    problem = problem_from_model(config.model_spec, config.grid)
    data = gen_dataset(config.model_spec, config.n_samples, config.grid, data_seed)
    train, val, _test = split_dataset(data, config.train_frac, config.val_frac, split_seed)
    cfg = replace(config.train, seed=train_seed)
    fit = simpo_fit if method == "simpo" else two_stage_fit
    return fit(problem, train, val, config.arch, cfg), val, problem


def cmd_train(config: ExperimentConfig, method: str, out_dir: str) -> int:
    result, _val, _problem = _fit_once(config, method)
    os.makedirs(out_dir, exist_ok=True)
    _atomic_via_tmp(
        os.path.join(out_dir, "checkpoint.json"),
        lambda tmp: save_checkpoint(result.params_star, tmp),
    )
    _atomic_via_tmp(
        os.path.join(out_dir, "training_log.csv"),
        lambda tmp: save_history_csv(result.history, tmp),
    )
    summary = {
        "method": method,
        "z_star": result.z_star,
        "g_star": result.g_star,
        "converged": result.converged,
        "iters_run": result.iters_run,
    }
    _atomic_write_text(
        os.path.join(out_dir, "summary.json"), json.dumps(summary, indent=2) + "\n"
    )
    print(
        f"{method}: z_star={result.z_star:g} g_star={result.g_star:g} "
        f"iters={result.iters_run} converged={result.converged}"
    )
    return 0


def cmd_evaluate(config: ExperimentConfig, checkpoint_path: str, out_path: str) -> int:
    data_seed, split_seed, _, mc_seed = derive_seeds(config.seed)
    params = load_checkpoint(checkpoint_path)
    problem = problem_from_model(config.model_spec, config.grid)
    data = gen_dataset(config.model_spec, config.n_samples, config.grid, data_seed)
    _train, val, _test = split_dataset(data, config.train_frac, config.val_frac, split_seed)
    profile = model_profile(params, val.X, config.grid, problem)
    action = argmin_profile(profile)
    cost, regret = evaluate_decision(config.model_spec, action, config.grid, config.n_mc, mc_seed)
    report = {"chosen_action": action, "expected_cost": cost, "regret": regret}
    _atomic_write_text(out_path, json.dumps(report, indent=2) + "\n")
    print(f"action={action:g} expected_cost={cost:g} regret={regret:g}")
    return 0


def cmd_compare(config: ExperimentConfig, out_path: str, jobs: int) -> int:
    reports = compare_methods(
        config.model_spec,
        config.grid,
        config.arch,
        config.train,
        config.n_seeds,
        n_samples=config.n_samples,
        train_frac=config.train_frac,
        val_frac=config.val_frac,
        n_mc=config.n_mc,
        base_seed=config.seed,
        jobs=jobs,
    )
    _atomic_via_tmp(out_path, lambda tmp: write_results_csv(reports, tmp))
    print(f"{'method':<10} {'mean_regret':>12} {'mean_cost':>12} {'seeds':>6}")
    for method in ("simpo", "two_stage", "oracle"):
        rows = [r for r in reports if r.method == method]
        regrets = np.array([r.regret for r in rows])
        costs = np.array([r.expected_cost for r in rows])
        ok = np.isfinite(regrets)
        mean_regret = float(regrets[ok].mean()) if ok.any() else float("nan")
        mean_cost = float(costs[ok].mean()) if ok.any() else float("nan")
        print(f"{method:<10} {mean_regret:>12.5g} {mean_cost:>12.5g} {ok.sum():>6}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="predopt",
        description="Joint prediction-and-optimization experiments on synthetic decision problems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a dataset CSV plus a provenance sidecar")
    gen.add_argument("--config", required=True)
    gen.add_argument("--out", required=True)
    gen.add_argument("--seed", type=int, default=None, help="override the config seed")

    train = sub.add_parser("train", help="fit one method and write checkpoint/log/summary")
    train.add_argument("--config", required=True)
    train.add_argument("--method", required=True, choices=["simpo", "two-stage"])
    train.add_argument("--out", required=True, help="output directory")
    train.add_argument("--seed", type=int, default=None)

    ev = sub.add_parser("evaluate", help="score a saved checkpoint's decision against the oracle")
    ev.add_argument("--config", required=True)
    ev.add_argument("--checkpoint", required=True)
    ev.add_argument("--out", required=True)
    ev.add_argument("--seed", type=int, default=None)

    cmp_ = sub.add_parser("compare", help="run the multi-seed method comparison")
    cmp_.add_argument("--config", required=True)
    cmp_.add_argument("--out", required=True)
    cmp_.add_argument("--jobs", type=int, default=1)
    cmp_.add_argument("--seed", type=int, default=None)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config)
        if args.seed is not None:
            config = replace(config, seed=args.seed)
        if args.command == "generate":
            return cmd_generate(config, args.out)
        if args.command == "train":
            method = "simpo" if args.method == "simpo" else "two_stage"
            return cmd_train(config, method, args.out)
        if args.command == "evaluate":
            return cmd_evaluate(config, args.checkpoint, args.out)
        if args.command == "compare":
            return cmd_compare(config, args.out, args.jobs)
        parser.error(f"unknown command {args.command!r}")
    except (ConfigError, ValidationError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except TrainingError as err:
        print(f"error: {err}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
