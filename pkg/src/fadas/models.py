"""Least-squares, softmax-regression and tanh-MLP losses with exact gradients."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from fadas.core import HyperParams, ModelKind, ModelSpec
from fadas.data import Dataset

__all__ = [
    "GradEval",
    "ModelSpec",
    "finite_diff_check",
    "init_params",
    "local_sgd",
    "loss_and_grad",
    "predict",
]


@dataclass(frozen=True)
class GradEval:
    loss: float
    grad: np.ndarray


def _unpack(spec: ModelSpec, params: np.ndarray):
    if spec.kind is ModelKind.LOGISTIC:
        cut = spec.C * spec.d_in
        return params[:cut].reshape(spec.C, spec.d_in), params[cut:]
    h, d, C = spec.hidden, spec.d_in, spec.C
    i = 0
    w1 = params[i : i + h * d].reshape(h, d)
    i += h * d
    b1 = params[i : i + h]
    i += h
    w2 = params[i : i + C * h].reshape(C, h)
    i += C * h
    return w1, b1, w2, params[i:]


def _softmax_xent(logits: np.ndarray, y: np.ndarray):
    z = logits - logits.max(axis=1, keepdims=True)
    ez = np.exp(z)
    s = ez.sum(axis=1, keepdims=True)
    n = len(y)
    loss = float(np.mean(np.log(s[:, 0]) - z[np.arange(n), y]))
    dlogits = ez / s
    dlogits[np.arange(n), y] -= 1.0
    return loss, dlogits / n


def _check(spec: ModelSpec, params: np.ndarray, dataset: Dataset):
    if params.ndim != 1 or len(params) != spec.param_dim:
        raise ValueError(f"params has length {params.size}, model expects {spec.param_dim}")
    if dataset.d_in != spec.d_in:
        raise ValueError(f"dataset has d_in={dataset.d_in}, model expects {spec.d_in}")


def loss_and_grad(spec: ModelSpec, params: np.ndarray, batch, dataset: Dataset) -> GradEval:
    """Mean per-sample loss over ``batch`` plus ``l2/2 ||params||^2``, with its gradient.

    ``batch`` indexes rows of ``dataset`` and may repeat indices.
    """
    params = np.asarray(params, dtype=np.float64)
    _check(spec, params, dataset)
    batch = np.asarray(batch, dtype=np.int64)
    if batch.size == 0:
        raise ValueError("empty batch")
    X = dataset.features[batch]
    y = dataset.labels[batch]

    if spec.kind is ModelKind.QUADRATIC:
        r = X @ params - y
        loss = 0.5 * float(np.mean(r * r))
        grad = X.T @ r / len(batch)
    elif spec.kind is ModelKind.LOGISTIC:
        W, b = _unpack(spec, params)
        loss, g = _softmax_xent(X @ W.T + b, y)
        grad = np.concatenate([(g.T @ X).ravel(), g.sum(axis=0)])
    else:
        w1, b1, w2, b2 = _unpack(spec, params)
        H = np.tanh(X @ w1.T + b1)
        loss, g = _softmax_xent(H @ w2.T + b2, y)
        dz = (g @ w2) * (1.0 - H * H)
        grad = np.concatenate([(dz.T @ X).ravel(), dz.sum(axis=0), (g.T @ H).ravel(), g.sum(axis=0)])

    if spec.l2_weight_decay:
        loss += 0.5 * spec.l2_weight_decay * float(params @ params)
        grad = grad + spec.l2_weight_decay * params
    return GradEval(loss, grad)


def predict(spec: ModelSpec, params: np.ndarray, features: np.ndarray) -> np.ndarray:
    if spec.kind is ModelKind.QUADRATIC:
        return features @ params
    if spec.kind is ModelKind.LOGISTIC:
        W, b = _unpack(spec, params)
        return np.argmax(features @ W.T + b, axis=1)
    w1, b1, w2, b2 = _unpack(spec, params)
    return np.argmax(np.tanh(features @ w1.T + b1) @ w2.T + b2, axis=1)


def finite_diff_check(spec: ModelSpec, params, batch, dataset: Dataset, h: float = 1e-5) -> float:
    """Max over coordinates of ``|analytic - central difference| / max(1, |analytic|)``."""
    params = np.asarray(params, dtype=np.float64)
    if params.size == 0:
        raise ValueError("zero-length params")
    if h <= 0:
        raise ValueError("h must be positive")
    analytic = loss_and_grad(spec, params, batch, dataset).grad
    worst = 0.0
    probe = params.copy()
    for j in range(params.size):
        probe[j] = params[j] + h
        up = loss_and_grad(spec, probe, batch, dataset).loss
        probe[j] = params[j] - h
        down = loss_and_grad(spec, probe, batch, dataset).loss
        probe[j] = params[j]
        numeric = (up - down) / (2 * h)
        worst = max(worst, abs(analytic[j] - numeric) / max(1.0, abs(analytic[j])))
    return worst


def init_params(spec: ModelSpec, stream: np.random.Generator | None = None) -> np.ndarray:
    """Zeros for the convex models; fan-in scaled normals for the MLP (needs ``stream``)."""
    x = np.zeros(spec.param_dim)
    if spec.kind is ModelKind.MLP:
        if stream is None:
            raise ValueError("MLP initialization needs a stream")
        h, d, C = spec.hidden, spec.d_in, spec.C
        x[: h * d] = stream.standard_normal(h * d) / np.sqrt(d)
        start = h * d + h
        x[start : start + C * h] = stream.standard_normal(C * h) / np.sqrt(h)
    return x


def local_sgd(
    spec: ModelSpec,
    x_start: np.ndarray,
    dataset: Dataset,
    shard: np.ndarray,
    hyper: HyperParams,
    stream: np.random.Generator | None = None,
    batch_size: int | None = None,
) -> np.ndarray:
    """Run ``hyper.K`` SGD steps at rate ``eta_l`` and return ``x_K - x_start``.

    Minibatches are drawn with replacement from ``shard`` via ``stream``;
    ``batch_size=None`` uses the whole shard every step and draws nothing.
    """
    shard = np.asarray(shard, dtype=np.int64)
    if shard.size == 0:
        raise ValueError("empty shard")
    if hyper.K < 1:
        raise ValueError("K must be >= 1")
    x0 = np.asarray(x_start, dtype=np.float64)
    x = x0.copy()
    for _ in range(hyper.K):
        if batch_size is None:
            batch = shard
        else:
            batch = shard[stream.integers(0, shard.size, size=batch_size)]
        x -= hyper.eta_l * loss_and_grad(spec, x, batch, dataset).grad
    return x - x0
