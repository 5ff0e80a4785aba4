"""Training loops: the joint simpo procedure and the two-stage baseline.

Each simpo iteration: (1) build the model-implied cost profile on the
validation inputs and turn it into action probabilities and the test-side
anchor; (2) compute the omega/gamma weights from the anchors; (3) take one
gradient step on F = pred*omega + task*gamma with the weights and action
probabilities frozen for the step; (4) check termination. The train-side
anchor depends only on historical labels, so it is computed once up front.

The two-stage baseline runs the same loop minimizing the predictive loss
alone (omega = gamma = 1, no task term) and takes its decision in a single
pass from the final model profile. With alpha = 0 and the task term disabled,
simpo_fit degenerates to exactly this, bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .core import Dataset, Problem, ValidationError, WeightConfig
from .objective import (
    AnchorActions,
    WeightPair,
    action_distribution,
    argmin_profile,
    empirical_profile,
    gamma_weight,
    joint_objective,
    model_profile,
    omega_weight,
)
from .predictor import (
    Architecture,
    PredictorParams,
    init_params,
    loss_and_grad,
    task_grad,
)

__all__ = [
    "TrainConfig",
    "HistoryRow",
    "TrainState",
    "TrainResult",
    "TrainingError",
    "simpo_fit",
    "two_stage_fit",
    "sgd_step",
    "check_termination",
    "save_history_csv",
]

HISTORY_COLUMNS = ("iter", "F", "pred_term", "task_term", "omega", "gamma", "z_star_test")


class TrainingError(RuntimeError):
    """Raised when a fit hits a non-finite loss or gradient."""

    def __init__(self, message: str, iteration: int):
        super().__init__(message)
        self.iteration = iteration


@dataclass(frozen=True)
class TrainConfig:
    weight_config: WeightConfig
    learning_rate: float
    batch_size: int = 0  # 0 means full batch
    max_iters: int = 500
    tol: float = 1e-6
    patience: int = 10
    seed: int = 0

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValidationError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.max_iters < 1:
            raise ValidationError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.patience < 1:
            raise ValidationError(f"patience must be >= 1, got {self.patience}")
        if not self.tol > 0:
            raise ValidationError(f"tol must be > 0, got {self.tol}")
        if self.batch_size < 0:
            raise ValidationError(f"batch_size must be >= 0, got {self.batch_size}")


@dataclass(frozen=True)
class HistoryRow:
    iter: int
    total: float
    pred_term: float
    task_term: float
    omega: float
    gamma: float
    z_star_test: float


@dataclass
class TrainState:
    """In-flight view of a run: current parameters, append-only history, and
    the fixed train-side anchor."""

    params: PredictorParams
    iter: int
    history: list
    z_star_train: float


@dataclass(frozen=True)
class TrainResult:
    params_star: PredictorParams
    z_star: float
    g_star: float
    iters_run: int
    converged: bool
    history: tuple
    z_star_train: float

    @property
    def anchors(self) -> AnchorActions:
        """Final anchor pair: the historical optimum and the decision."""
        return AnchorActions(self.z_star_train, self.z_star)


def sgd_step(params: PredictorParams, grad: np.ndarray, lr: float) -> PredictorParams:
    """One descent step: weights <- weights - lr * grad."""
    grad = np.asarray(grad, dtype=float)
    if grad.shape != params.weights.shape:
        raise ValidationError(
            f"gradient length {grad.shape} does not match params {params.weights.shape}"
        )
    if not lr >= 0:
        raise ValidationError(f"lr must be nonnegative, got {lr}")
    return PredictorParams(params.architecture, params.weights - lr * grad)


def check_termination(history, config: TrainConfig) -> bool:
    """True at the iteration cap, or when the relative improvement of F stayed
    below tol for the last `patience` consecutive iterations (each improvement
    measured against max(|previous F|, 1e-12))."""
    if len(history) >= config.max_iters:
        return True
    if len(history) < config.patience + 1:
        return False
    tail = history[-(config.patience + 1) :]
    for prev, cur in zip(tail, tail[1:]):
        improvement = (prev.total - cur.total) / max(abs(prev.total), 1e-12)
        if improvement >= config.tol:
            return False
    return True


def _batch_indices(rng: np.random.Generator, n: int, batch_size: int) -> np.ndarray:
    if batch_size == 0 or batch_size >= n:
        return np.arange(n)
    return rng.choice(n, size=batch_size, replace=False)


def _fit(
    problem: Problem,
    train: Dataset,
    val: Dataset,
    arch: Architecture,
    config: TrainConfig,
    use_joint_weights: bool,
) -> TrainResult:
    if len(train) == 0 or len(val) == 0:
        raise ValidationError("train and val splits must be non-empty")
    wc: WeightConfig = config.weight_config
    grid = problem.grid

    z_star_train = argmin_profile(empirical_profile(train.y, problem))
    params = init_params(arch, config.seed)
    # Batch sampling gets its own stream so it never aliases the init draws.
    batch_rng = np.random.default_rng(np.random.SeedSequence([config.seed, 1]))
    state = TrainState(params=params, iter=0, history=[], z_star_train=z_star_train)
    ones = np.ones(len(train))

    task_enabled = use_joint_weights and wc.task_term_enabled
    converged = False
    while True:
        state.iter += 1
        idx = _batch_indices(batch_rng, len(train), config.batch_size)

        profile = model_profile(state.params, val.X, grid, problem)
        probs = action_distribution(profile, wc.tau)
        z_star_test = argmin_profile(profile)
        if use_joint_weights:
            omega = omega_weight(probs, grid, z_star_train, wc.alpha)
            gamma = gamma_weight(z_star_train, z_star_test, wc.beta, grid)
        else:
            omega, gamma = 1.0, 1.0

        pred_loss, pred_grad = loss_and_grad(
            state.params, train.X[idx], train.z_obs[idx], train.y[idx], ones[idx], problem
        )
        if task_enabled:
            task_loss, task_grad_vec = task_grad(state.params, val.X, grid, probs, problem)
            total_grad = omega * pred_grad + gamma * task_grad_vec
        else:
            task_loss = 0.0
            total_grad = omega * pred_grad

        if (
            not np.isfinite(pred_loss)
            or not np.isfinite(task_loss)
            or not np.all(np.isfinite(total_grad))
        ):
            raise TrainingError(
                f"non-finite loss or gradient at iteration {state.iter} "
                f"(pred={pred_loss!r}, task={task_loss!r}); reduce the learning rate",
                iteration=state.iter,
            )
        value = joint_objective(pred_loss, task_loss, WeightPair(omega, gamma), task_enabled)
        state.history.append(
            HistoryRow(
                iter=state.iter,
                total=value.total,
                pred_term=value.pred_term,
                task_term=value.task_term,
                omega=omega,
                gamma=gamma,
                z_star_test=z_star_test,
            )
        )
        state.params = sgd_step(state.params, total_grad, config.learning_rate)
        if check_termination(state.history, config):
            converged = len(state.history) < config.max_iters
            break

    final_profile = model_profile(state.params, val.X, grid, problem)
    z_star = argmin_profile(final_profile)
    g_star = float(final_profile.values[grid.index_of(z_star)])
    return TrainResult(
        params_star=state.params,
        z_star=z_star,
        g_star=g_star,
        iters_run=len(state.history),
        converged=converged,
        history=tuple(state.history),
        z_star_train=z_star_train,
    )


def simpo_fit(
    problem: Problem,
    train: Dataset,
    val: Dataset,
    arch: Architecture,
    config: TrainConfig,
) -> TrainResult:
    """Fit with the joint weighted objective; see the module docstring."""
    return _fit(problem, train, val, arch, config, use_joint_weights=True)


def two_stage_fit(
    problem: Problem,
    train: Dataset,
    val: Dataset,
    arch: Architecture,
    config: TrainConfig,
) -> TrainResult:
    """Predict-then-optimize baseline: minimize the predictive loss alone,
    then take the decision from the fitted model's cost profile."""
    return _fit(problem, train, val, arch, config, use_joint_weights=False)


def save_history_csv(history, path) -> None:
    """Training log: iter,F,pred_term,task_term,omega,gamma,z_star_test."""
    lines = [",".join(HISTORY_COLUMNS)]
    for row in history:
        lines.append(
            ",".join(
                [
                    str(row.iter),
                    repr(row.total),
                    repr(row.pred_term),
                    repr(row.task_term),
                    repr(row.omega),
                    repr(row.gamma),
                    repr(row.z_star_test),
                ]
            )
        )
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
