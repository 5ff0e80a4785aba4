"""Shared domain types: action grids, datasets, problem definitions, weight settings.

Everything here is an immutable value after construction; arrays are stored
read-only so instances can be shared across concurrent experiment runs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "ValidationError",
    "ActionGrid",
    "LabeledSample",
    "Dataset",
    "Problem",
    "WeightConfig",
    "make_grid",
    "split_dataset",
    "squared_error",
    "squared_error_grad",
    "save_dataset_csv",
    "load_dataset_csv",
]


class ValidationError(ValueError):
    """An input violated a documented precondition."""


def _frozen_array(values, dtype=float) -> np.ndarray:
    out = np.array(values, dtype=dtype)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class ActionGrid:
    """Uniform discretization of the closed action interval [z_min, z_max]."""

    z_min: float
    z_max: float
    n_points: int
    points: np.ndarray

    def __post_init__(self):
        if not self.z_min < self.z_max:
            raise ValidationError(
                f"grid needs z_min < z_max, got z_min={self.z_min}, z_max={self.z_max}"
            )
        if self.n_points < 2:
            raise ValidationError(f"grid needs n_points >= 2, got {self.n_points}")
        if len(self.points) != self.n_points:
            raise ValidationError("points length does not match n_points")
        object.__setattr__(self, "points", _frozen_array(self.points))

    @property
    def step(self) -> float:
        return (self.z_max - self.z_min) / (self.n_points - 1)

    @property
    def width(self) -> float:
        return self.z_max - self.z_min

    def index_of(self, action: float) -> int:
        """Index of the grid point closest to `action`."""
        return int(np.argmin(np.abs(self.points - action)))


def make_grid(z_min: float, z_max: float, n_points: int) -> ActionGrid:
    """Build an evenly spaced action grid with exact endpoints."""
    if not np.isfinite(z_min) or not np.isfinite(z_max) or z_min >= z_max:
        raise ValidationError(
            f"grid needs finite z_min < z_max, got z_min={z_min}, z_max={z_max}"
        )
    if int(n_points) != n_points or n_points < 2:
        raise ValidationError(f"grid needs an integer n_points >= 2, got {n_points}")
    points = np.linspace(z_min, z_max, int(n_points))
    return ActionGrid(float(z_min), float(z_max), int(n_points), points)


@dataclass(frozen=True)
class LabeledSample:
    """One observation: features x, the historically logged action, the outcome."""

    x: np.ndarray
    z_obs: float
    y: float


@dataclass(frozen=True)
class Dataset:
    """Column-oriented sample store; `samples` gives the per-row view.

    X has shape (n, d), z_obs and y shape (n,). Non-empty, one shared
    feature dimension.
    """

    X: np.ndarray
    z_obs: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        z = np.asarray(self.z_obs, dtype=float).ravel()
        y = np.asarray(self.y, dtype=float).ravel()
        if X.shape[0] == 0:
            raise ValidationError("dataset must be non-empty")
        if X.shape[0] != z.shape[0] or X.shape[0] != y.shape[0]:
            raise ValidationError(
                f"column lengths disagree: X {X.shape[0]}, z_obs {z.shape[0]}, y {y.shape[0]}"
            )
        object.__setattr__(self, "X", _frozen_array(X))
        object.__setattr__(self, "z_obs", _frozen_array(z))
        object.__setattr__(self, "y", _frozen_array(y))

    def __len__(self) -> int:
        return self.X.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.X.shape[1]

    @property
    def samples(self) -> list[LabeledSample]:
        return [
            LabeledSample(self.X[i], float(self.z_obs[i]), float(self.y[i]))
            for i in range(len(self))
        ]

    @classmethod
    def from_samples(cls, samples: list[LabeledSample]) -> "Dataset":
        if not samples:
            raise ValidationError("dataset must be non-empty")
        d = len(samples[0].x)
        if any(len(s.x) != d for s in samples):
            raise ValidationError("all samples must share one feature dimension")
        return cls(
            X=np.array([s.x for s in samples], dtype=float),
            z_obs=np.array([s.z_obs for s in samples], dtype=float),
            y=np.array([s.y for s in samples], dtype=float),
        )

    def take(self, indices: np.ndarray) -> "Dataset":
        return Dataset(self.X[indices], self.z_obs[indices], self.y[indices])


def squared_error(y_true, y_pred):
    """Default predictive loss, elementwise (y_pred - y_true)^2."""
    diff = np.asarray(y_pred) - np.asarray(y_true)
    return diff * diff


def squared_error_grad(y_true, y_pred):
    """d/d(y_pred) of squared_error."""
    return 2.0 * (np.asarray(y_pred) - np.asarray(y_true))


@dataclass(frozen=True)
class Problem:
    """One decision task: an action grid plus its cost and loss functions.

    task_cost(z, y) is the cost of taking action z when the outcome is y;
    predictive_loss(y_true, y_pred) is the per-sample fitting loss. Both must
    be numpy-vectorized (broadcast over array arguments). The *_grad_y /
    *_grad companions are the derivatives with respect to the outcome /
    prediction argument, with the value-0 convention exactly at kinks; they
    exist so trainers can form exact analytic gradients.
    """

    grid: ActionGrid
    task_cost: Callable
    predictive_loss: Callable = squared_error
    name: str = "problem"
    task_cost_grad_y: Callable = None
    predictive_loss_grad: Callable = squared_error_grad

    def __post_init__(self):
        if self.task_cost_grad_y is None:
            raise ValidationError("Problem requires task_cost_grad_y (0 at kinks)")


@dataclass(frozen=True)
class WeightConfig:
    """Settings for the joint-objective weight functions.

    alpha scales how fast the predictive-loss weight grows with the action
    distribution's distance from the historical optimum; beta scales how fast
    the task-term weight decays with anchor disagreement; tau is the soft-min
    temperature for the action distribution.
    """

    alpha: float = 2.0
    beta: float = 20.0
    tau: float = 0.5
    task_term_enabled: bool = True

    def __post_init__(self):
        if self.alpha < 0:
            raise ValidationError(f"alpha must be >= 0, got {self.alpha}")
        if self.beta < 0:
            raise ValidationError(f"beta must be >= 0, got {self.beta}")
        if not self.tau > 0:
            raise ValidationError(f"tau must be > 0, got {self.tau}")


def split_dataset(
    data: Dataset, train_frac: float, val_frac: float, seed: int
) -> tuple[Dataset, Dataset, Dataset]:
    """Shuffle-split into (train, val, test); deterministic in seed.

    Sizes are floor(n * frac) for train and val, remainder to test. Raises if
    any split would be empty.
    """
    if train_frac <= 0 or val_frac <= 0:
        raise ValidationError("train_frac and val_frac must be positive")
    if train_frac + val_frac >= 1:
        raise ValidationError(
            f"train_frac + val_frac must be < 1, got {train_frac + val_frac}"
        )
    n = len(data)
    n_train = int(np.floor(n * train_frac))
    n_val = int(np.floor(n * val_frac))
    n_test = n - n_train - n_val
    if n_train < 1 or n_val < 1 or n_test < 1:
        raise ValidationError(
            f"split of {n} samples gives sizes ({n_train}, {n_val}, {n_test}); "
            "every split must be non-empty"
        )
    perm = np.random.default_rng(seed).permutation(n)
    return (
        data.take(perm[:n_train]),
        data.take(perm[n_train : n_train + n_val]),
        data.take(perm[n_train + n_val :]),
    )


def save_dataset_csv(data: Dataset, path) -> None:
    """Write the dataset CSV: header x0..x{d-1},z_obs,y, LF line endings."""
    d = data.feature_dim
    header = ",".join([f"x{j}" for j in range(d)] + ["z_obs", "y"])
    lines = [header]
    for i in range(len(data)):
        cells = [repr(float(v)) for v in data.X[i]]
        cells.append(repr(float(data.z_obs[i])))
        cells.append(repr(float(data.y[i])))
        lines.append(",".join(cells))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def load_dataset_csv(path) -> Dataset:
    with open(path, "r", newline="") as fh:
        lines = [ln for ln in fh.read().split("\n") if ln]
    if not lines:
        raise ValidationError(f"{path}: empty dataset file")
    header = lines[0].split(",")
    if len(header) < 3 or header[-2] != "z_obs" or header[-1] != "y":
        raise ValidationError(f"{path}: expected header x0..x{{d-1}},z_obs,y")
    d = len(header) - 2
    if header[:d] != [f"x{j}" for j in range(d)]:
        raise ValidationError(f"{path}: feature columns must be named x0..x{d - 1}")
    rows = np.array([[float(c) for c in ln.split(",")] for ln in lines[1:]])
    if rows.ndim != 2 or rows.shape[1] != d + 2:
        raise ValidationError(f"{path}: rows do not match the header width")
    return Dataset(X=rows[:, :d], z_obs=rows[:, d], y=rows[:, d + 1])
