"""Joint-objective machinery: cost profiles over the action grid, anchor
actions, soft-min action probabilities, and the omega/gamma weight functions.

The objective combines a predictive-loss term and a task-cost term,

    F = pred_loss * omega + task_loss * gamma,

where omega grows as the action distribution drifts away from the historical
optimum (more pressure to fit the data) and gamma shrinks as the historical and
model-implied optima disagree (less trust in the model-implied cost).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ActionGrid, Problem, ValidationError
from .predictor import PredictorParams, predict_on_grid

__all__ = [
    "CostProfile",
    "AnchorActions",
    "WeightPair",
    "JointObjectiveValue",
    "empirical_profile",
    "model_profile",
    "argmin_profile",
    "action_distribution",
    "omega_weight",
    "gamma_weight",
    "joint_objective",
]


@dataclass(frozen=True)
class CostProfile:
    """Cost as a function of action, tabulated on the grid.

    source is "empirical" when averaged over historical outcomes and "model"
    when averaged over model predictions.
    """

    grid: ActionGrid
    values: np.ndarray
    source: str

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.n_points,):
            raise ValidationError("profile values must have one entry per grid point")
        if not np.all(np.isfinite(v)):
            raise ValidationError("profile values must be finite")
        if self.source not in ("empirical", "model"):
            raise ValidationError(f"unknown profile source {self.source!r}")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class AnchorActions:
    z_star_train: float
    z_star_test: float


@dataclass(frozen=True)
class WeightPair:
    omega: float
    gamma: float

    def __post_init__(self):
        if self.omega < 1.0:
            raise ValidationError(f"omega must be >= 1, got {self.omega}")
        if not 0.0 < self.gamma <= 1.0:
            raise ValidationError(f"gamma must be in (0, 1], got {self.gamma}")


@dataclass(frozen=True)
class JointObjectiveValue:
    total: float
    pred_term: float
    task_term: float
    weights: WeightPair


def empirical_profile(train_labels, problem: Problem) -> CostProfile:
    """Average task cost of each grid action over the historical labels."""
    y = np.asarray(train_labels, dtype=float).ravel()
    if y.size == 0:
        raise ValidationError("train_labels must be non-empty")
    points = problem.grid.points
    values = problem.task_cost(points[:, None], y[None, :]).mean(axis=1)
    return CostProfile(problem.grid, values, "empirical")


def model_profile(
    params: PredictorParams, inputs, grid: ActionGrid, problem: Problem
) -> CostProfile:
    """Average task cost of each grid action over the model's predictions."""
    X = np.asarray(inputs, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValidationError("inputs must be a non-empty (m, d) array")
    preds = predict_on_grid(params, X, grid.points)  # (m, K)
    values = problem.task_cost(grid.points[None, :], preds).mean(axis=0)
    return CostProfile(grid, values, "model")


def argmin_profile(profile: CostProfile) -> float:
    """Grid action with the smallest cost; ties break toward the smallest action."""
    return float(profile.grid.points[int(np.argmin(profile.values))])


def action_distribution(profile: CostProfile, tau: float) -> np.ndarray:
    """Soft-min probabilities over grid actions at temperature tau.

    p_k proportional to exp(-(v_k - min v)/tau); the shift makes the largest
    exponent exactly 0 so the normalizer never overflows.
    """
    if not tau > 0:
        raise ValidationError(f"tau must be > 0, got {tau}")
    shifted = profile.values - profile.values.min()
    w = np.exp(-shifted / tau)
    return w / w.sum()


def omega_weight(
    probs: np.ndarray, grid: ActionGrid, z_star_train: float, alpha: float
) -> float:
    """Predictive-loss weight: 1 + alpha * normalized mean distance from the
    historical optimum under the action distribution."""
    probs = np.asarray(probs, dtype=float).ravel()
    if probs.shape[0] != grid.n_points:
        raise ValidationError("probs length must match the grid")
    if abs(probs.sum() - 1.0) > 1e-9:
        raise ValidationError("probs must sum to 1 within 1e-9")
    if alpha < 0:
        raise ValidationError(f"alpha must be >= 0, got {alpha}")
    d_norm = float(probs @ np.abs(grid.points - z_star_train)) / grid.width
    return 1.0 + alpha * d_norm


def gamma_weight(
    z_star_train: float, z_star_test: float, beta: float, grid: ActionGrid
) -> float:
    """Task-cost weight: exp(-beta * normalized anchor distance), in (0, 1]."""
    if beta < 0:
        raise ValidationError(f"beta must be >= 0, got {beta}")
    return float(np.exp(-beta * abs(z_star_train - z_star_test) / grid.width))


def joint_objective(
    pred_loss: float, task_loss: float, weights: WeightPair, task_enabled: bool
) -> JointObjectiveValue:
    """Assemble F = pred_loss * omega + task_loss * gamma.

    With the task term disabled the task component is recorded as 0 so the
    composition total == pred*omega + task*gamma stays exact.
    """
    if not np.isfinite(pred_loss) or not np.isfinite(task_loss):
        raise ValidationError("objective terms must be finite")
    task_term = float(task_loss) if task_enabled else 0.0
    total = float(pred_loss) * weights.omega + task_term * weights.gamma
    return JointObjectiveValue(total, float(pred_loss), task_term, weights)
