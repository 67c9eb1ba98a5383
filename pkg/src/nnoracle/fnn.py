"""Feed-forward network with logistic units, trained by plain back-propagation.

Weights of each non-input layer are stored as a matrix of shape
``(n_out, n_in + 1)``; column 0 holds the bias weight (its input is always 1).
The error of one sample is ``0.5 * sum((out - target) ** 2)`` and every update
subtracts ``learning_rate * gradient``.

Training evaluates the logistic derivative ``o * (1 - o)`` at ``o`` clipped to
``[clip, 1 - clip]`` (``TrainConfig.derivative_clip``, default 0.01).  Without
that floor, output units saturated at the wrong end barely move and incremental
training stalls with a few dozen misfit samples.  ``derivative_clip=0`` gives
exact back-propagation; ``gradient`` is always exact.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field

import numba
import numpy as np
from numba.typed import List as NumbaList


class Mode(str, enum.Enum):
    INCREMENTAL = "incremental"
    BATCH = "batch"


class ConfigError(ValueError):
    pass


class TrainingDiverged(ArithmeticError):
    def __init__(self, epoch: int):
        super().__init__(f"training diverged: non-finite error at epoch {epoch}")
        self.epoch = epoch


@dataclass(frozen=True)
class TrainConfig:
    mode: Mode = Mode.INCREMENTAL
    learning_rate: float = 0.5
    epochs: int = 1500
    init_range: float = 0.5
    seed: int = 0
    shuffle: bool = False
    derivative_clip: float = 0.01

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if not self.learning_rate > 0:
            raise ConfigError("learning_rate must be positive")
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if not self.init_range > 0:
            raise ConfigError("init_range must be positive")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")
        if not 0 <= self.derivative_clip < 0.5:
            raise ConfigError("derivative_clip must lie in [0, 0.5)")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["mode"] = self.mode.value
        return d


@dataclass
class Network:
    layer_sizes: tuple[int, ...]
    weights: list[np.ndarray] = field(repr=False)

    def __post_init__(self):
        self.layer_sizes = tuple(int(s) for s in self.layer_sizes)
        if len(self.layer_sizes) < 2:
            raise ConfigError("a network needs at least an input and an output layer")
        if len(self.weights) != len(self.layer_sizes) - 1:
            raise ConfigError("one weight matrix per non-input layer expected")
        for W, n_in, n_out in zip(self.weights, self.layer_sizes, self.layer_sizes[1:]):
            if W.shape != (n_out, n_in + 1):
                raise ConfigError(
                    f"weight matrix {W.shape} incompatible with layer {n_in}->{n_out}"
                )
            if not np.all(np.isfinite(W)):
                raise ConfigError("weights must be finite")

    def copy(self) -> "Network":
        return Network(self.layer_sizes, [W.copy() for W in self.weights])

    @property
    def n_weights(self) -> int:
        return sum(W.size for W in self.weights)


def activation(t):
    return 1.0 / (1.0 + np.exp(-np.asarray(t, dtype=float)))


def init_network(layer_sizes, seed: int = 0, init_range: float = 0.5) -> Network:
    """Random network with every weight uniform in ``[-init_range, init_range]``."""
    sizes = tuple(int(s) for s in layer_sizes)
    if len(sizes) < 2 or min(sizes) < 1:
        raise ConfigError(f"invalid layer sizes {layer_sizes!r}")
    rng = np.random.default_rng(seed)
    weights = [
        rng.uniform(-init_range, init_range, size=(n_out, n_in + 1))
        for n_in, n_out in zip(sizes, sizes[1:])
    ]
    return Network(sizes, weights)


def _layer_outputs(net: Network, X: np.ndarray) -> list[np.ndarray]:
    acts = [X]
    for W in net.weights:
        acts.append(activation(acts[-1] @ W[:, 1:].T + W[:, 0]))
    return acts


def forward(net: Network, x) -> np.ndarray:
    """Network output for one input vector or a batch of row vectors."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != net.layer_sizes[0]:
        raise ValueError(
            f"input has {x.shape[-1]} components, network expects {net.layer_sizes[0]}"
        )
    return _layer_outputs(net, x)[-1]


def _slope(o: np.ndarray, clip: float) -> np.ndarray:
    if clip:
        o = np.clip(o, clip, 1.0 - clip)
    return o * (1.0 - o)


def _backprop(net, X, T, clip=0.0) -> list[np.ndarray]:
    # summed over the rows of X
    acts = _layer_outputs(net, X)
    delta = (acts[-1] - T) * _slope(acts[-1], clip)
    grads = [None] * len(net.weights)
    for l in range(len(net.weights) - 1, -1, -1):
        prev = acts[l]
        g = np.empty_like(net.weights[l])
        g[:, 0] = delta.sum(axis=0)
        g[:, 1:] = delta.T @ prev
        grads[l] = g
        if l:
            delta = (delta @ net.weights[l][:, 1:]) * _slope(prev, clip)
    return grads


def gradient(net: Network, x, target) -> list[np.ndarray]:
    """Gradient of ``0.5 * ||forward(x) - target||^2`` w.r.t. every weight."""
    x = np.asarray(x, dtype=float).reshape(1, -1)
    t = np.asarray(target, dtype=float).reshape(1, -1)
    return _backprop(net, x, t)


def update_direction(net: Network, x, target, derivative_clip: float = 0.0):
    """Per-sample weight step direction used by training (exact when clip is 0)."""
    x = np.asarray(x, dtype=float).reshape(1, -1)
    t = np.asarray(target, dtype=float).reshape(1, -1)
    return _backprop(net, x, t, derivative_clip)


def batch_gradient(net: Network, X, T, derivative_clip: float = 0.0) -> list[np.ndarray]:
    """Mean of the per-sample update directions over a batch."""
    X = np.asarray(X, dtype=float)
    T = np.asarray(T, dtype=float).reshape(len(X), -1)
    return [g / len(X) for g in _backprop(net, X, T, derivative_clip)]


def mse(net: Network, X, T) -> float:
    """Mean squared error over samples and output components."""
    out = forward(net, np.asarray(X, dtype=float))
    return float(np.mean((out - np.asarray(T, dtype=float).reshape(out.shape)) ** 2))


@numba.njit(cache=True)
def _incremental_epochs(weights, X, T, lr, epochs, orders, clip):
    n_layers = len(weights)
    n_samples = X.shape[0]
    n_out = T.shape[1]
    acts = NumbaList()
    acts.append(np.empty(X.shape[1]))
    deltas = NumbaList()
    for W in weights:
        acts.append(np.empty(W.shape[0]))
        deltas.append(np.empty(W.shape[0]))
    history = np.empty(epochs)
    for e in range(epochs):
        err = 0.0
        for s in orders[e % orders.shape[0]]:
            a0 = acts[0]
            for j in range(a0.shape[0]):
                a0[j] = X[s, j]
            for l in range(n_layers):
                W = weights[l]
                prev = acts[l]
                out = acts[l + 1]
                for i in range(W.shape[0]):
                    t = W[i, 0]
                    for j in range(prev.shape[0]):
                        t += W[i, j + 1] * prev[j]
                    out[i] = 1.0 / (1.0 + math.exp(-t))
            out = acts[n_layers]
            d = deltas[n_layers - 1]
            for i in range(n_out):
                diff = out[i] - T[s, i]
                err += diff * diff
                o = min(max(out[i], clip), 1.0 - clip)
                d[i] = diff * o * (1.0 - o)
            for l in range(n_layers - 1, 0, -1):
                W = weights[l]
                dn = deltas[l]
                dp = deltas[l - 1]
                a = acts[l]
                for j in range(W.shape[1] - 1):
                    acc = 0.0
                    for i in range(W.shape[0]):
                        acc += W[i, j + 1] * dn[i]
                    o = min(max(a[j], clip), 1.0 - clip)
                    dp[j] = acc * o * (1.0 - o)
            for l in range(n_layers):
                W = weights[l]
                d = deltas[l]
                prev = acts[l]
                for i in range(W.shape[0]):
                    step = lr * d[i]
                    W[i, 0] -= step
                    for j in range(prev.shape[0]):
                        W[i, j + 1] -= step * prev[j]
        history[e] = err / (n_samples * n_out)
        if not math.isfinite(history[e]):
            return history[: e + 1], e
    return history, -1


def _sample_orders(n: int, cfg: TrainConfig) -> np.ndarray:
    if not cfg.shuffle:
        return np.arange(n).reshape(1, n)
    rng = np.random.default_rng([cfg.seed, 1])
    return np.stack([rng.permutation(n) for _ in range(cfg.epochs)])


def train(net: Network, X, T, cfg: TrainConfig) -> tuple[Network, np.ndarray]:
    """Train a copy of ``net``; returns it with the per-epoch training error.

    Incremental mode updates after every sample, visiting samples in stored
    order (or a seeded per-epoch permutation when ``cfg.shuffle``); its
    per-epoch error is accumulated while the epoch runs.  Batch mode applies
    one update per epoch from the mean gradient; its per-epoch error is the
    MSE at the weights the epoch started from.
    """
    X = np.ascontiguousarray(X, dtype=float)
    T = np.ascontiguousarray(T, dtype=float).reshape(len(X), -1)
    if len(X) == 0:
        raise ValueError("training data is empty")
    if X.shape[1] != net.layer_sizes[0] or T.shape[1] != net.layer_sizes[-1]:
        raise ValueError("training data does not match the network's layer sizes")
    net = net.copy()

    if cfg.mode is Mode.INCREMENTAL:
        weights = NumbaList(net.weights)
        orders = np.ascontiguousarray(_sample_orders(len(X), cfg), dtype=np.int64)
        history, bad = _incremental_epochs(
            weights, X, T, cfg.learning_rate, cfg.epochs, orders, cfg.derivative_clip
        )
        if bad >= 0:
            raise TrainingDiverged(int(bad))
        net.weights = list(weights)
        if not all(np.all(np.isfinite(W)) for W in net.weights):
            raise TrainingDiverged(cfg.epochs - 1)
        return net, np.asarray(history)

    history = np.empty(cfg.epochs)
    for e in range(cfg.epochs):
        history[e] = mse(net, X, T)
        if not math.isfinite(history[e]):
            raise TrainingDiverged(e)
        for W, g in zip(net.weights, batch_gradient(net, X, T, cfg.derivative_clip)):
            W -= cfg.learning_rate * g
    if not all(np.all(np.isfinite(W)) for W in net.weights):
        raise TrainingDiverged(cfg.epochs - 1)
    return net, history
