"""Synthetic decision worlds with known generative truth, plus their oracles.

A TrueModel defines the outcome process

    y = base_weights . x + intercept + e*z + q*e*z^2 + eps,

with x ~ N(0, feature_sd^2)^d and eps ~ N(0, noise_sd^2). The action enters
the outcome directly (elasticity e), optionally with curvature (q != 0), which
is what makes a linear predictor class misspecified. Historical actions come
from an explicit logging policy over the grid, because an action-conditioned
predictor is only identifiable if logged actions vary.

Oracles evaluate actions against the true process by Monte Carlo with common
random numbers across grid actions, so profile comparisons are exact under a
shared (seed, n_mc).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import ActionGrid, Dataset, Problem, ValidationError

__all__ = [
    "TrueModel",
    "newsvendor_cost",
    "newsvendor_cost_grad_y",
    "pricing_cost",
    "pricing_cost_grad_y",
    "newsvendor_problem",
    "pricing_problem",
    "problem_from_model",
    "gen_dataset",
    "world_draws",
    "cost_draws",
    "oracle_expected_cost",
    "oracle_action",
    "model_to_json",
    "model_from_json",
]

_KINDS = ("newsvendor", "pricing")
_POLICIES = ("uniform", "biased")


@dataclass(frozen=True)
class TrueModel:
    """Ground-truth data-generating process for one synthetic world."""

    kind: str
    base_weights: tuple
    intercept: float
    action_effect: float
    nonlinearity: float
    noise_sd: float
    feature_sd: float
    cost_params: dict
    logging: dict = field(default_factory=lambda: {"policy": "uniform"})

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValidationError(f"unknown problem kind {self.kind!r}")
        if not self.noise_sd > 0:
            raise ValidationError(f"noise_sd must be > 0, got {self.noise_sd}")
        if not self.feature_sd > 0:
            raise ValidationError(f"feature_sd must be > 0, got {self.feature_sd}")
        bw = tuple(float(v) for v in self.base_weights)
        if len(bw) < 1:
            raise ValidationError("base_weights must have at least one entry")
        object.__setattr__(self, "base_weights", bw)
        cp = dict(self.cost_params)
        if self.kind == "newsvendor":
            c_h, c_s = cp.get("c_h"), cp.get("c_s")
            if c_h is None or c_s is None or c_h < 0 or c_s < 0 or c_h + c_s <= 0:
                raise ValidationError(
                    "newsvendor needs cost_params {c_h >= 0, c_s >= 0, c_h + c_s > 0}"
                )
        else:
            cap = cp.get("capacity")
            if cap is None or not cap > 0:
                raise ValidationError("pricing needs cost_params {capacity > 0}")
        object.__setattr__(self, "cost_params", cp)
        lg = dict(self.logging)
        policy = lg.get("policy")
        if policy not in _POLICIES:
            raise ValidationError(f"unknown logging policy {policy!r}")
        if policy == "biased":
            if "center" not in lg or not lg.get("width", 0) > 0:
                raise ValidationError("biased logging needs center and width > 0")
        object.__setattr__(self, "logging", lg)

    @property
    def feature_dim(self) -> int:
        return len(self.base_weights)


def newsvendor_cost(z, y, c_h: float, c_s: float):
    """Holding cost on leftover stock plus shortage cost on unmet outcome."""
    z = np.asarray(z, dtype=float)
    y = np.asarray(y, dtype=float)
    return c_h * np.maximum(z - y, 0.0) + c_s * np.maximum(y - z, 0.0)


def newsvendor_cost_grad_y(z, y, c_h: float, c_s: float):
    """d(newsvendor_cost)/dy; 0 exactly at the kink y == z."""
    z = np.asarray(z, dtype=float)
    y = np.asarray(y, dtype=float)
    return np.where(y > z, c_s, 0.0) + np.where(y < z, -c_h, 0.0)


def pricing_cost(z, y, capacity: float):
    """Negative revenue at price z: sales are the outcome clamped to [0, capacity]."""
    z = np.asarray(z, dtype=float)
    y = np.asarray(y, dtype=float)
    return -z * np.clip(y, 0.0, capacity)


def pricing_cost_grad_y(z, y, capacity: float):
    """d(pricing_cost)/dy; 0 outside (0, capacity) and exactly at the clamps."""
    z = np.asarray(z, dtype=float)
    y = np.asarray(y, dtype=float)
    return np.where((y > 0.0) & (y < capacity), -z, 0.0)


def newsvendor_problem(grid: ActionGrid, c_h: float, c_s: float) -> Problem:
    return Problem(
        grid=grid,
        task_cost=lambda z, y: newsvendor_cost(z, y, c_h, c_s),
        name="newsvendor",
        task_cost_grad_y=lambda z, y: newsvendor_cost_grad_y(z, y, c_h, c_s),
    )


def pricing_problem(grid: ActionGrid, capacity: float) -> Problem:
    return Problem(
        grid=grid,
        task_cost=lambda z, y: pricing_cost(z, y, capacity),
        name="pricing",
        task_cost_grad_y=lambda z, y: pricing_cost_grad_y(z, y, capacity),
    )


def problem_from_model(model: TrueModel, grid: ActionGrid) -> Problem:
    if model.kind == "newsvendor":
        return newsvendor_problem(grid, model.cost_params["c_h"], model.cost_params["c_s"])
    return pricing_problem(grid, model.cost_params["capacity"])


def mean_outcome(model: TrueModel, base, z):
    """Noise-free outcome given the feature part `base = X . w + intercept`."""
    e, q = model.action_effect, model.nonlinearity
    z = np.asarray(z, dtype=float)
    return base + e * z + q * e * z * z


def _logging_probs(model: TrueModel, grid: ActionGrid) -> np.ndarray:
    if model.logging["policy"] == "uniform":
        return np.full(grid.n_points, 1.0 / grid.n_points)
    center, width = model.logging["center"], model.logging["width"]
    w = np.maximum(0.0, 1.0 - np.abs(grid.points - center) / width)
    if w.sum() <= 0:
        raise ValidationError(
            "biased logging puts no mass on the grid; widen it or move the center"
        )
    return w / w.sum()


def gen_dataset(model: TrueModel, n: int, grid: ActionGrid, seed: int) -> Dataset:
    """Draw n samples under the logging policy; deterministic in seed."""
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    d = model.feature_dim
    X = rng.normal(0.0, model.feature_sd, size=(n, d))
    idx = rng.choice(grid.n_points, size=n, p=_logging_probs(model, grid))
    z = grid.points[idx]
    eps = rng.normal(0.0, model.noise_sd, size=n)
    base = X @ np.asarray(model.base_weights) + model.intercept
    y = mean_outcome(model, base, z) + eps
    return Dataset(X=X, z_obs=z, y=y)


def world_draws(model: TrueModel, n_mc: int, seed: int):
    """Fresh (feature part, noise) draws for counterfactual evaluation."""
    rng = np.random.default_rng(seed)
    X = rng.normal(0.0, model.feature_sd, size=(n_mc, model.feature_dim))
    eps = rng.normal(0.0, model.noise_sd, size=n_mc)
    return X @ np.asarray(model.base_weights) + model.intercept, eps


def _true_cost_fn(model: TrueModel):
    if model.kind == "newsvendor":
        c_h, c_s = model.cost_params["c_h"], model.cost_params["c_s"]
        return lambda z, y: newsvendor_cost(z, y, c_h, c_s)
    cap = model.cost_params["capacity"]
    return lambda z, y: pricing_cost(z, y, cap)


def cost_draws(model: TrueModel, z: float, base: np.ndarray, eps: np.ndarray):
    """Per-draw cost of action z under shared world draws (one value per draw)."""
    y = mean_outcome(model, base, z) + eps
    return _true_cost_fn(model)(z, y)


def oracle_expected_cost(model: TrueModel, z: float, n_mc: int, seed: int) -> float:
    """Monte Carlo estimate of the true expected cost of action z.

    Counterfactual: outcomes are generated under the queried z, not under any
    logged action. Deterministic in seed.
    """
    if n_mc < 1:
        raise ValidationError(f"n_mc must be >= 1, got {n_mc}")
    base, eps = world_draws(model, n_mc, seed)
    return float(cost_draws(model, z, base, eps).mean())


def oracle_action(
    model: TrueModel, grid: ActionGrid, n_mc: int, seed: int
) -> tuple[float, float]:
    """Grid scan of oracle_expected_cost with common random numbers.

    The same (seed, n_mc) draws are reused for every action, so the returned
    profile is exactly reproducible and per-action values match
    oracle_expected_cost at the same seed. Ties break toward the smallest
    action.
    """
    if n_mc < 1:
        raise ValidationError(f"n_mc must be >= 1, got {n_mc}")
    base, eps = world_draws(model, n_mc, seed)
    values = np.empty(grid.n_points)
    for k, z in enumerate(grid.points):
        values[k] = cost_draws(model, float(z), base, eps).mean()
    k_best = int(np.argmin(values))
    return float(grid.points[k_best]), float(values[k_best])


def model_to_json(model: TrueModel) -> dict:
    return {
        "kind": model.kind,
        "base_weights": list(model.base_weights),
        "intercept": model.intercept,
        "action_effect": model.action_effect,
        "nonlinearity": model.nonlinearity,
        "noise_sd": model.noise_sd,
        "feature_sd": model.feature_sd,
        "cost_params": dict(model.cost_params),
        "logging": dict(model.logging),
    }


def model_from_json(blob: dict) -> TrueModel:
    return TrueModel(
        kind=blob["kind"],
        base_weights=tuple(blob["base_weights"]),
        intercept=float(blob["intercept"]),
        action_effect=float(blob["action_effect"]),
        nonlinearity=float(blob["nonlinearity"]),
        noise_sd=float(blob["noise_sd"]),
        feature_sd=float(blob["feature_sd"]),
        cost_params=dict(blob["cost_params"]),
        logging=dict(blob["logging"]),
    )
