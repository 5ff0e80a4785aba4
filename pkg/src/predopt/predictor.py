"""Action-conditioned predictors y_hat = h(x, z; theta) with analytic gradients.

Two architectures: `linear` (affine in [x; z]) and `mlp1` (one tanh hidden
layer). Parameters live in a single flat vector so the SGD loop, checkpoints,
and finite-difference checks all see one layout:

    linear: [w_x (d), w_z, b]
    mlp1:   [W1 ((d+1) x h, row-major by hidden unit), b1 (h), w2 (h), b2]

For mlp1 the input is u = [x; z] and the forward pass is
w2 . tanh(W1 u + b1) + b2.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .core import ActionGrid, Problem, ValidationError

__all__ = [
    "Architecture",
    "PredictorParams",
    "init_params",
    "predict",
    "predict_batch",
    "predict_on_grid",
    "loss_and_grad",
    "task_grad",
    "save_checkpoint",
    "load_checkpoint",
]

_KINDS = ("linear", "mlp1")


@dataclass(frozen=True)
class Architecture:
    kind: str
    feature_dim: int
    hidden_units: int = 0
    activation: str = "tanh"

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValidationError(f"unknown architecture kind {self.kind!r}")
        if self.feature_dim < 1:
            raise ValidationError(f"feature_dim must be >= 1, got {self.feature_dim}")
        if self.kind == "mlp1":
            if self.hidden_units < 1:
                raise ValidationError(
                    f"mlp1 needs hidden_units >= 1, got {self.hidden_units}"
                )
            if self.activation != "tanh":
                raise ValidationError(f"unsupported activation {self.activation!r}")

    @property
    def n_weights(self) -> int:
        d = self.feature_dim
        if self.kind == "linear":
            return d + 2
        h = self.hidden_units
        return (d + 1) * h + h + h + 1


@dataclass(frozen=True)
class PredictorParams:
    architecture: Architecture
    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.ndim != 1 or w.shape[0] != self.architecture.n_weights:
            raise ValidationError(
                f"weight vector length {w.shape} does not match architecture "
                f"layout ({self.architecture.n_weights})"
            )
        if not np.all(np.isfinite(w)):
            raise ValidationError("weights must all be finite")
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)


def init_params(arch: Architecture, seed: int) -> PredictorParams:
    """Initial parameters: linear starts at zero; mlp1 draws hidden weights
    uniformly from [-s, s] with s = 1/sqrt(d+1) and zeroes the biases and the
    output layer. Deterministic in seed."""
    w = np.zeros(arch.n_weights)
    if arch.kind == "mlp1":
        d, h = arch.feature_dim, arch.hidden_units
        s = 1.0 / np.sqrt(d + 1)
        rng = np.random.default_rng(seed)
        w[: (d + 1) * h] = rng.uniform(-s, s, size=(d + 1) * h)
    return PredictorParams(arch, w)


def _unpack_linear(params: PredictorParams):
    d = params.architecture.feature_dim
    w = params.weights
    return w[:d], w[d], w[d + 1]


def _unpack_mlp1(params: PredictorParams):
    d = params.architecture.feature_dim
    h = params.architecture.hidden_units
    w = params.weights
    W1 = w[: (d + 1) * h].reshape(h, d + 1)
    b1 = w[(d + 1) * h : (d + 1) * h + h]
    w2 = w[(d + 1) * h + h : (d + 1) * h + 2 * h]
    b2 = w[-1]
    return W1, b1, w2, b2


def predict(params: PredictorParams, x, z: float) -> float:
    """Forward pass for a single (x, z)."""
    x = np.asarray(x, dtype=float).ravel()
    if x.shape[0] != params.architecture.feature_dim:
        raise ValidationError(
            f"x has dimension {x.shape[0]}, architecture expects "
            f"{params.architecture.feature_dim}"
        )
    return float(predict_batch(params, x[None, :], np.array([z]))[0])


def predict_batch(params: PredictorParams, X: np.ndarray, Z: np.ndarray) -> np.ndarray:
    """Predictions for paired rows: X (n, d) with actions Z (n,) -> (n,)."""
    X = np.asarray(X, dtype=float)
    Z = np.asarray(Z, dtype=float)
    if X.ndim != 2 or X.shape[1] != params.architecture.feature_dim:
        raise ValidationError("X must be (n, feature_dim)")
    if params.architecture.kind == "linear":
        w_x, w_z, b = _unpack_linear(params)
        return X @ w_x + w_z * Z + b
    W1, b1, w2, b2 = _unpack_mlp1(params)
    d = params.architecture.feature_dim
    A = X @ W1[:, :d].T + np.outer(Z, W1[:, d]) + b1
    return np.tanh(A) @ w2 + b2


def predict_on_grid(
    params: PredictorParams, X: np.ndarray, points: np.ndarray
) -> np.ndarray:
    """Predictions for every input crossed with every action: (m, K)."""
    X = np.asarray(X, dtype=float)
    points = np.asarray(points, dtype=float)
    if params.architecture.kind == "linear":
        w_x, w_z, b = _unpack_linear(params)
        return (X @ w_x)[:, None] + w_z * points[None, :] + b
    W1, b1, w2, b2 = _unpack_mlp1(params)
    d = params.architecture.feature_dim
    # A[j, k, i] = x_j . W1[i, :d] + z_k * W1[i, d] + b1[i]
    A = (X @ W1[:, :d].T)[:, None, :] + np.outer(points, W1[:, d])[None, :, :] + b1
    return np.tanh(A) @ w2 + b2


def loss_and_grad(
    params: PredictorParams,
    X: np.ndarray,
    Z: np.ndarray,
    Y: np.ndarray,
    weights: np.ndarray,
    problem: Problem,
) -> tuple[float, np.ndarray]:
    """Weighted predictive loss and its exact gradient.

    loss = (1/n) sum_i weights_i * l(y_i, h(x_i, z_i)); grad is d(loss)/d(theta)
    over the flat weight vector.
    """
    X = np.asarray(X, dtype=float)
    Z = np.asarray(Z, dtype=float).ravel()
    Y = np.asarray(Y, dtype=float).ravel()
    weights = np.asarray(weights, dtype=float).ravel()
    n = Z.shape[0]
    if n == 0:
        raise ValidationError("batch must be non-empty")
    if np.any(weights < 0) or not np.all(np.isfinite(weights)):
        raise ValidationError("sample weights must be finite and nonnegative")

    preds = predict_batch(params, X, Z)
    loss = float(np.mean(weights * problem.predictive_loss(Y, preds)))
    # c_i = (1/n) w_i dl/dy_hat_i; grad = sum_i c_i dy_hat_i/dtheta
    c = weights * problem.predictive_loss_grad(Y, preds) / n

    grad = np.empty_like(params.weights)
    if params.architecture.kind == "linear":
        d = params.architecture.feature_dim
        grad[:d] = X.T @ c
        grad[d] = c @ Z
        grad[d + 1] = c.sum()
        return loss, grad

    W1, b1, w2, _ = _unpack_mlp1(params)
    d = params.architecture.feature_dim
    h = params.architecture.hidden_units
    U = np.column_stack([X, Z])
    T = np.tanh(U @ W1.T + b1)
    S = (c[:, None] * w2) * (1.0 - T * T)  # (n, h) backprop through tanh
    grad[: (d + 1) * h] = (S.T @ U).ravel()
    grad[(d + 1) * h : (d + 1) * h + h] = S.sum(axis=0)
    grad[(d + 1) * h + h : (d + 1) * h + 2 * h] = T.T @ c
    grad[-1] = c.sum()
    return loss, grad


def task_grad(
    params: PredictorParams,
    X: np.ndarray,
    grid: ActionGrid,
    action_probs: np.ndarray,
    problem: Problem,
) -> tuple[float, np.ndarray]:
    """Expected model-implied task cost under `action_probs`, and its gradient.

    task_loss = sum_k p_k * gbar(z_k) with gbar(z) = (1/m) sum_j g(z, h(x_j, z)).
    The probabilities are treated as constants; the gradient flows only through
    the predictions, using the problem's outcome-derivative of g (0 at kinks).
    """
    X = np.asarray(X, dtype=float)
    probs = np.asarray(action_probs, dtype=float).ravel()
    if probs.shape[0] != grid.n_points:
        raise ValidationError("action_probs length must match the grid")
    if abs(probs.sum() - 1.0) > 1e-9:
        raise ValidationError(
            f"action_probs must sum to 1 within 1e-9, got {probs.sum()!r}"
        )
    m = X.shape[0]
    if m == 0:
        raise ValidationError("inputs must be non-empty")

    points = grid.points
    P = predict_on_grid(params, X, points)  # (m, K)
    G = problem.task_cost(points[None, :], P)
    task_loss = float(probs @ G.mean(axis=0))

    C = (problem.task_cost_grad_y(points[None, :], P) * probs[None, :]) / m  # (m, K)

    grad = np.empty_like(params.weights)
    if params.architecture.kind == "linear":
        d = params.architecture.feature_dim
        row = C.sum(axis=1)  # per-input total coefficient
        col = C.sum(axis=0)  # per-action total coefficient
        grad[:d] = X.T @ row
        grad[d] = col @ points
        grad[d + 1] = C.sum()
        return task_loss, grad

    W1, b1, w2, _ = _unpack_mlp1(params)
    d = params.architecture.feature_dim
    h = params.architecture.hidden_units
    A = (X @ W1[:, :d].T)[:, None, :] + np.outer(points, W1[:, d])[None, :, :] + b1
    T = np.tanh(A)  # (m, K, h)
    S = C[:, :, None] * w2 * (1.0 - T * T)  # (m, K, h)
    gW1 = np.empty((h, d + 1))
    gW1[:, :d] = np.einsum("jkh,jd->hd", S, X)
    gW1[:, d] = np.einsum("jkh,k->h", S, points)
    grad[: (d + 1) * h] = gW1.ravel()
    grad[(d + 1) * h : (d + 1) * h + h] = S.sum(axis=(0, 1))
    grad[(d + 1) * h + h : (d + 1) * h + 2 * h] = np.einsum("jkh,jk->h", T, C)
    grad[-1] = C.sum()
    return task_loss, grad


def save_checkpoint(params: PredictorParams, path) -> None:
    arch = params.architecture
    blob: dict = {"kind": arch.kind, "feature_dim": arch.feature_dim}
    if arch.kind == "mlp1":
        blob["hidden_units"] = arch.hidden_units
        blob["activation"] = arch.activation
    with open(path, "w") as fh:
        json.dump({"architecture": blob, "weights": list(params.weights)}, fh)
        fh.write("\n")


def load_checkpoint(path) -> PredictorParams:
    with open(path) as fh:
        raw = json.load(fh)
    blob = raw["architecture"]
    arch = Architecture(
        kind=blob["kind"],
        feature_dim=blob["feature_dim"],
        hidden_units=blob.get("hidden_units", 0),
        activation=blob.get("activation", "tanh"),
    )
    return PredictorParams(arch, np.asarray(raw["weights"], dtype=float))
