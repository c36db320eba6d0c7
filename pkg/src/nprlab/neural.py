"""Bias-free fully connected ReLU network ``f(x) = sqrt(m) W_L relu(... relu(W_1 x))``.

Parameters live in one flat float64 vector (layer order, each matrix
row-major); :class:`NetworkParams` exposes per-layer views that alias it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, DivergedLoss, OddDimension

DIVERGENCE_LIMIT = 1e12


@dataclass(frozen=True)
class NetworkShape:
    d: int
    m: int
    L: int

    def __post_init__(self):
        if self.d < 1 or self.m < 1:
            raise ValueError("d and m must be positive")
        if self.L < 2:
            raise ValueError("depth L must be >= 2")

    @property
    def p(self) -> int:
        # L weight matrices: m x d, (L-2) of m x m, 1 x m
        return self.m + self.m * self.d + self.m * self.m * (self.L - 2)

    @property
    def layer_shapes(self) -> list[tuple[int, int]]:
        return [(self.m, self.d)] + [(self.m, self.m)] * (self.L - 2) + [(1, self.m)]

    def check_even(self) -> None:
        if self.m % 2 or self.d % 2:
            raise OddDimension(f"symmetric init needs even d and m, got d={self.d}, m={self.m}")


@dataclass
class NetworkParams:
    shape: NetworkShape
    flat: np.ndarray
    layers: list[np.ndarray] = field(init=False, repr=False)

    def __post_init__(self):
        self.flat = np.ascontiguousarray(self.flat, dtype=np.float64)
        if self.flat.shape != (self.shape.p,):
            raise DimensionMismatch(f"flat vector has length {self.flat.size}, expected p={self.shape.p}")
        self.layers = []
        off = 0
        for r, c in self.shape.layer_shapes:
            self.layers.append(self.flat[off:off + r * c].reshape(r, c))
            off += r * c

    def copy(self) -> "NetworkParams":
        return NetworkParams(self.shape, self.flat.copy())


def init_symmetric(shape: NetworkShape, rng: np.random.Generator) -> NetworkParams:
    """Block-symmetric Gaussian initialization.

    Hidden layers are ``[[W, 0], [0, W]]`` with ``W_ij ~ N(0, 4/m)`` and the
    output layer is ``[w^T, -w^T]`` with ``w_i ~ N(0, 2/m)``. The network is
    then exactly zero on every input whose two halves coincide.
    """
    shape.check_even()
    m, d = shape.m, shape.d
    h = m // 2
    params = NetworkParams(shape, np.zeros(shape.p))
    first = params.layers[0]
    W = rng.normal(0.0, np.sqrt(4.0 / m), size=(h, d // 2))
    first[:h, : d // 2] = W
    first[h:, d // 2:] = W
    for layer in params.layers[1:-1]:
        W = rng.normal(0.0, np.sqrt(4.0 / m), size=(h, h))
        layer[:h, :h] = W
        layer[h:, h:] = W
    w = rng.normal(0.0, np.sqrt(2.0 / m), size=h)
    params.layers[-1][0, :h] = w
    params.layers[-1][0, h:] = -w
    return params


def _as_batch(params: NetworkParams, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != params.shape.d:
        raise DimensionMismatch(f"context dimension {X.shape[-1]} != input_dim {params.shape.d}")
    return X


def _activations(params: NetworkParams, X: np.ndarray):
    pre, post = [], [X]
    h = X
    for W in params.layers[:-1]:
        a = h @ W.T
        pre.append(a)
        h = np.maximum(a, 0.0)
        post.append(h)
    out = np.sqrt(params.shape.m) * (h @ params.layers[-1][0])
    return pre, post, out


def forward_batch(params: NetworkParams, X) -> np.ndarray:
    X = _as_batch(params, X)
    return _activations(params, X)[2]


def forward(params: NetworkParams, x) -> float:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise DimensionMismatch("forward expects a single context vector")
    return float(forward_batch(params, x)[0])


def _backprop(params: NetworkParams, pre, post, coef: np.ndarray) -> np.ndarray:
    """Flat gradient of ``sum_i coef_i * f(x_i)``."""
    sm = np.sqrt(params.shape.m)
    grads = [None] * params.shape.L
    wL = params.layers[-1][0]
    grads[-1] = (sm * (coef @ post[-1]))[None, :]
    delta = (sm * np.outer(coef, wL)) * (pre[-1] > 0)
    for l in range(params.shape.L - 2, -1, -1):
        grads[l] = delta.T @ post[l]
        if l > 0:
            delta = (delta @ params.layers[l]) * (pre[l - 1] > 0)
    return np.concatenate([g.ravel() for g in grads])


def gradient(params: NetworkParams, x) -> np.ndarray:
    """Exact gradient of ``forward(params, x)`` w.r.t. the flat parameters (ReLU'(0) = 0)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise DimensionMismatch("gradient expects a single context vector")
    X = _as_batch(params, x)
    pre, post, _ = _activations(params, X)
    return _backprop(params, pre, post, np.ones(1))


def gradient_batch(params: NetworkParams, X) -> np.ndarray:
    """Per-row gradients, shape ``(n, p)``."""
    X = _as_batch(params, X)
    pre, post, _ = _activations(params, X)
    sm = np.sqrt(params.shape.m)
    n = X.shape[0]
    blocks = [None] * params.shape.L
    wL = params.layers[-1][0]
    blocks[-1] = sm * post[-1]
    delta = sm * wL[None, :] * (pre[-1] > 0)
    for l in range(params.shape.L - 2, -1, -1):
        blocks[l] = np.einsum("ni,nj->nij", delta, post[l]).reshape(n, -1)
        if l > 0:
            delta = (delta @ params.layers[l]) * (pre[l - 1] > 0)
    return np.concatenate(blocks, axis=1)


@dataclass(frozen=True)
class TrainerConfig:
    lam: float
    eta: float
    J: int = 100
    tol: float = 1e-8

    def __post_init__(self):
        if not (np.isfinite(self.lam) and self.lam > 0):
            raise ValueError(f"lam must be finite and > 0, got {self.lam}")
        if not (np.isfinite(self.eta) and self.eta > 0):
            raise ValueError(f"eta must be finite and > 0, got {self.eta}")
        if self.J < 0:
            raise ValueError("J must be >= 0")


@dataclass
class TrainResult:
    params: NetworkParams
    initial_objective: float
    final_objective: float
    steps: int


class _GroupedData:
    # Squared loss over repeated contexts equals a count-weighted loss on the
    # unique contexts against their mean target, plus a constant.
    def __init__(self, X: np.ndarray, y: np.ndarray):
        if X.shape[0] == 0:
            self.X = X
            self.counts = np.zeros(0)
            self.ybar = np.zeros(0)
            self.const = 0.0
            return
        Xu, inv, counts = np.unique(X, axis=0, return_inverse=True, return_counts=True)
        inv = inv.ravel()
        self.X = Xu
        self.counts = counts.astype(np.float64)
        self.ybar = np.bincount(inv, weights=y, minlength=Xu.shape[0]) / self.counts
        self.const = 0.5 * float(y @ y - self.counts @ (self.ybar ** 2))


def objective(params: NetworkParams, anchor: NetworkParams, X, y, lam: float) -> float:
    """Perturbed-history objective ``sum (f(x) - y)^2 / 2 + m*lam/2 * ||theta - theta0||^2``."""
    X = np.asarray(X, dtype=np.float64).reshape(-1, params.shape.d)
    y = np.asarray(y, dtype=np.float64).ravel()
    r = forward_batch(params, X) - y if X.shape[0] else np.zeros(0)
    diff = params.flat - anchor.flat
    return 0.5 * float(r @ r) + 0.5 * params.shape.m * lam * float(diff @ diff)


def _objective_and_grad(params, anchor, data: _GroupedData, lam):
    diff = params.flat - anchor.flat
    reg = params.shape.m * lam
    obj = 0.5 * reg * float(diff @ diff)
    grad = reg * diff
    if data.X.shape[0]:
        pre, post, out = _activations(params, data.X)
        r = out - data.ybar
        obj += 0.5 * float(data.counts @ (r * r)) + data.const
        grad = grad + _backprop(params, pre, post, data.counts * r)
    return obj, grad


def train_perturbed(start: NetworkParams, anchor: NetworkParams, X, y, cfg: TrainerConfig) -> TrainResult:
    """Full-batch gradient descent on the perturbed-history objective.

    ``y`` already holds the (possibly perturbed) targets; this function never
    draws noise. Runs at most ``cfg.J`` steps from ``start`` with step size
    ``cfg.eta`` and stops early once a step improves the objective by less
    than ``cfg.tol``.
    """
    X = np.asarray(X, dtype=np.float64).reshape(-1, start.shape.d)
    y = np.asarray(y, dtype=np.float64).ravel()
    if X.shape[0] != y.shape[0]:
        raise DimensionMismatch(f"{X.shape[0]} contexts but {y.shape[0]} targets")
    data = _GroupedData(X, y)
    params = start.copy()
    obj, grad = _objective_and_grad(params, anchor, data, cfg.lam)
    initial = obj
    steps = 0
    for _ in range(cfg.J):
        params.flat -= cfg.eta * grad
        steps += 1
        new_obj, grad = _objective_and_grad(params, anchor, data, cfg.lam)
        if not np.isfinite(new_obj) or new_obj > DIVERGENCE_LIMIT:
            raise DivergedLoss(f"objective reached {new_obj:.3e} after {steps} steps (eta={cfg.eta:g})")
        improvement = obj - new_obj
        obj = new_obj
        if improvement < cfg.tol:
            break
    return TrainResult(params, initial, obj, steps)
