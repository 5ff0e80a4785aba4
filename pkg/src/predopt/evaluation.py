"""Regret evaluation against the oracle and the multi-seed comparison harness.

All methods within one seed share a single Monte Carlo stream (common random
numbers), so regret differences between methods carry no MC noise and the
oracle's own regret is exactly zero.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .core import ActionGrid, ValidationError, split_dataset
from .predictor import Architecture, predict_batch
from .problems import (
    TrueModel,
    cost_draws,
    world_draws,
    gen_dataset,
    problem_from_model,
)
from .training import TrainConfig, TrainingError, simpo_fit, two_stage_fit

__all__ = [
    "DecisionReport",
    "METHOD_ORDER",
    "evaluate_decision",
    "compare_methods",
    "write_results_csv",
    "derive_seeds",
]

METHOD_ORDER = ("simpo", "two_stage", "oracle")

RESULTS_COLUMNS = (
    "method",
    "seed",
    "problem",
    "chosen_action",
    "expected_cost",
    "regret",
    "pred_mse",
    "iters_run",
    "wall_ms",
)


@dataclass(frozen=True)
class DecisionReport:
    method: str
    seed: int
    problem: str
    chosen_action: float
    expected_cost: float
    regret: float
    pred_mse: float
    iters_run: int
    wall_ms: float


def derive_seeds(run_seed: int) -> tuple[int, int, int, int]:
    """Per-purpose sub-seeds (data, split, train, mc) for one run.

    Hashed through SeedSequence so e.g. the MC stream never replays the
    training-data draws.
    """
    state = np.random.SeedSequence(run_seed).generate_state(4)
    return tuple(int(s) for s in state)


def evaluate_decision(
    model: TrueModel, action: float, grid: ActionGrid, n_mc: int, seed: int
) -> tuple[float, float]:
    """True expected cost of `action` and its regret vs the oracle optimum.

    Both sides use the same MC draws, so the oracle action gets regret exactly
    0 and every other grid action gets regret >= 0. Regret within three MC
    standard errors of 0 is clamped to 0.
    """
    points = grid.points
    if not np.any(np.isclose(points, action, rtol=0.0, atol=1e-9 * max(1.0, grid.width))):
        raise ValidationError(f"action {action} is not a grid point")
    base, eps = world_draws(model, n_mc, seed)
    costs_at_action = cost_draws(model, float(action), base, eps)
    values = np.empty(grid.n_points)
    for k, z in enumerate(points):
        values[k] = cost_draws(model, float(z), base, eps).mean()
    k_best = int(np.argmin(values))
    diffs = costs_at_action - cost_draws(model, float(points[k_best]), base, eps)
    regret = float(diffs.mean())
    se = float(diffs.std(ddof=1) / np.sqrt(n_mc)) if n_mc > 1 else 0.0
    if abs(regret) <= 3.0 * se:
        regret = 0.0
    return float(costs_at_action.mean()), regret


def _pred_mse(params, test) -> float:
    resid = test.y - predict_batch(params, test.X, test.z_obs)
    return float(np.mean(resid * resid))


def _failed_report(method: str, seed: int, problem_name: str, iters: int, wall_ms: float):
    nan = float("nan")
    return DecisionReport(method, seed, problem_name, nan, nan, nan, nan, iters, wall_ms)


def _run_seed(args) -> list[DecisionReport]:
    """One seed's worth of work: generate, split, fit both methods, evaluate.

    Takes a plain-data tuple so it can cross a process boundary.
    """
    (model, grid, arch, config, run_seed, n_samples, train_frac, val_frac, n_mc) = args
    data_seed, split_seed, train_seed, mc_seed = derive_seeds(run_seed)
    problem = problem_from_model(model, grid)
    data = gen_dataset(model, n_samples, grid, data_seed)
    train, val, test = split_dataset(data, train_frac, val_frac, split_seed)
    cfg = replace(config, seed=train_seed)

    reports = []
    for method, fit in (("simpo", simpo_fit), ("two_stage", two_stage_fit)):
        t0 = time.perf_counter()
        try:
            result = fit(problem, train, val, arch, cfg)
        except TrainingError as err:
            wall = (time.perf_counter() - t0) * 1e3
            reports.append(_failed_report(method, run_seed, problem.name, err.iteration, wall))
            continue
        wall = (time.perf_counter() - t0) * 1e3
        cost, regret = evaluate_decision(model, result.z_star, grid, n_mc, mc_seed)
        reports.append(
            DecisionReport(
                method=method,
                seed=run_seed,
                problem=problem.name,
                chosen_action=result.z_star,
                expected_cost=cost,
                regret=regret,
                pred_mse=_pred_mse(result.params_star, test),
                iters_run=result.iters_run,
                wall_ms=wall,
            )
        )

    t0 = time.perf_counter()
    base, eps = world_draws(model, n_mc, mc_seed)
    values = np.empty(grid.n_points)
    for k, z in enumerate(grid.points):
        values[k] = cost_draws(model, float(z), base, eps).mean()
    k_best = int(np.argmin(values))
    wall = (time.perf_counter() - t0) * 1e3
    reports.append(
        DecisionReport(
            method="oracle",
            seed=run_seed,
            problem=problem.name,
            chosen_action=float(grid.points[k_best]),
            expected_cost=float(values[k_best]),
            regret=0.0,
            pred_mse=float("nan"),
            iters_run=0,
            wall_ms=wall,
        )
    )
    return reports


def compare_methods(
    model: TrueModel,
    grid: ActionGrid,
    arch: Architecture,
    config: TrainConfig,
    n_seeds: int,
    *,
    n_samples: int,
    train_frac: float,
    val_frac: float,
    n_mc: int,
    base_seed: int = 0,
    jobs: int = 1,
) -> list[DecisionReport]:
    """Run simpo and two_stage on identical splits for each seed and report
    both against the oracle. Rows come back ordered by (seed, method) no
    matter how many workers ran them."""
    if n_seeds < 1:
        raise ValidationError(f"n_seeds must be >= 1, got {n_seeds}")
    work = [
        (model, grid, arch, config, base_seed + i, n_samples, train_frac, val_frac, n_mc)
        for i in range(n_seeds)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_run_seed, work))
    else:
        chunks = [_run_seed(w) for w in work]
    reports = [r for chunk in chunks for r in chunk]
    reports.sort(key=lambda r: (r.seed, METHOD_ORDER.index(r.method)))
    return reports


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def write_results_csv(reports, path, normalize_timing: bool = True) -> None:
    """Results CSV with a stable column order and 17-significant-digit floats.

    normalize_timing writes wall_ms as 0 so reruns of the same experiment are
    byte-identical; measured timing stays on the DecisionReport objects.
    """
    lines = [",".join(RESULTS_COLUMNS)]
    for r in reports:
        wall = 0.0 if normalize_timing else r.wall_ms
        lines.append(
            ",".join(
                [
                    r.method,
                    str(r.seed),
                    r.problem,
                    _fmt(r.chosen_action),
                    _fmt(r.expected_cost),
                    _fmt(r.regret),
                    _fmt(r.pred_mse),
                    str(r.iters_run),
                    _fmt(wall),
                ]
            )
        )
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
