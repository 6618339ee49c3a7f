"""Feed-forward network with softmax output, trained by plain mini-batch SGD.

Softmax regression is the same network with no hidden layers, so the
logistic learner reuses this module.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..rng import make_rng

ACTIVATIONS = ("sigmoid", "relu")


@dataclass(frozen=True)
class MlpArchitecture:
    layer_widths: tuple
    activation: tuple | str = "relu"
    n_classes: int = 2

    def __post_init__(self):
        widths = tuple(int(w) for w in self.layer_widths)
        if any(w < 1 for w in widths):
            raise ValueError(f"layer widths must be positive, got {widths}")
        act = self.activation
        acts = (act,) * len(widths) if isinstance(act, str) else tuple(act)
        if len(acts) != len(widths):
            raise ValueError("need one activation per hidden layer")
        for a in acts:
            if a not in ACTIVATIONS:
                raise ValueError(f"unknown activation {a!r}")
        if self.n_classes < 2:
            raise ValueError("n_classes must be at least 2")
        object.__setattr__(self, "layer_widths", widths)
        object.__setattr__(self, "activation", acts)


def sigmoid(z):
    # split by sign so exp never overflows
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def softmax(z):
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def init_params(arch: MlpArchitecture, n_inputs: int, seed: int) -> list:
    """He init before ReLU, Xavier before sigmoid and the softmax layer."""
    rng = make_rng(seed, "mlp_init")
    sizes = [n_inputs, *arch.layer_widths, arch.n_classes]
    params = []
    for i in range(len(sizes) - 1):
        fan_in, fan_out = sizes[i], sizes[i + 1]
        if i < len(arch.activation) and arch.activation[i] == "relu":
            scale = np.sqrt(2.0 / fan_in)
        else:
            scale = np.sqrt(2.0 / (fan_in + fan_out))
        params.append((rng.normal(0.0, scale, (fan_in, fan_out)), np.zeros(fan_out)))
    return params


def forward(arch: MlpArchitecture, params, X):
    """Returns (probabilities, cache of layer inputs / pre-activations)."""
    a = X
    cache = []
    for (W, b), act in zip(params[:-1], arch.activation):
        z = a @ W + b
        cache.append((a, z))
        a = sigmoid(z) if act == "sigmoid" else np.maximum(z, 0.0)
    W, b = params[-1]
    cache.append((a, None))
    return softmax(a @ W + b), cache


def loss_and_grads(arch: MlpArchitecture, params, X, y):
    """Mean cross-entropy over the batch and its gradient for every parameter."""
    probs, cache = forward(arch, params, X)
    m = len(y)
    loss = -np.mean(np.log(np.maximum(probs[np.arange(m), y], 1e-300)))
    delta = probs.copy()
    delta[np.arange(m), y] -= 1.0
    delta /= m
    grads = [None] * len(params)
    for layer in range(len(params) - 1, -1, -1):
        a, _ = cache[layer]
        W, _ = params[layer]
        grads[layer] = (a.T @ delta, delta.sum(axis=0))
        if layer == 0:
            break
        back = delta @ W.T
        a_prev, z_prev = cache[layer - 1]
        if arch.activation[layer - 1] == "sigmoid":
            s = sigmoid(z_prev)
            delta = back * s * (1.0 - s)
        else:
            delta = back * (z_prev > 0)
    return loss, grads


def train_sgd(arch, params, X, y, *, lr, batch_size, epochs, seed, l2=0.0):
    rng = make_rng(seed, "mlp_sgd")
    n = len(y)
    for _ in range(epochs):
        order = rng.permutation(n)
        for start in range(0, n, batch_size):
            idx = order[start:start + batch_size]
            _, grads = loss_and_grads(arch, params, X[idx], y[idx])
            for (W, b), (gW, gb) in zip(params, grads):
                if l2:
                    gW = gW + l2 * W
                W -= lr * gW
                b -= lr * gb
    return params


def train_full_batch(arch, params, X, y, *, lr, epochs, l2=0.0):
    for _ in range(epochs):
        _, grads = loss_and_grads(arch, params, X, y)
        for (W, b), (gW, gb) in zip(params, grads):
            W -= lr * (gW + l2 * W)
            b -= lr * gb
    return params


def mlp_gradient_check(arch: MlpArchitecture, sample, epsilon: float = 1e-5,
                       params=None, seed: int = 0) -> float:
    """Max relative error between backprop and central differences.

    ``sample`` is an :class:`~mlmath.dataset.Example` (or a ``(features,
    label)`` pair).  The relative error of a coordinate is
    ``|g - f| / max(|g| + |f|, 1e-6)``; the floor keeps gradients that are
    zero up to rounding from dominating.
    """
    if not 0.0 < epsilon <= 1e-3:
        raise ValueError(f"epsilon must lie in (0, 1e-3], got {epsilon}")
    x, label = (sample.features, sample.label) if hasattr(sample, "features") else sample
    X = np.asarray(x, dtype=np.float64).reshape(1, -1)
    y = np.array([int(label)])
    if params is None:
        params = init_params(arch, X.shape[1], seed)
    params = [(W.astype(np.float64).copy(), b.astype(np.float64).copy()) for W, b in params]
    loss, grads = loss_and_grads(arch, params, X, y)
    if not np.isfinite(loss):
        raise ValueError("non-finite loss")
    worst = 0.0
    for (W, b), (gW, gb) in zip(params, grads):
        for P, G in ((W, gW), (b, gb)):
            flat, gflat = P.reshape(-1), G.reshape(-1)
            for k in range(flat.size):
                old = flat[k]
                flat[k] = old + epsilon
                up, _ = loss_and_grads(arch, params, X, y)
                flat[k] = old - epsilon
                down, _ = loss_and_grads(arch, params, X, y)
                flat[k] = old
                if not (np.isfinite(up) and np.isfinite(down)):
                    raise ValueError("non-finite loss")
                fd = (up - down) / (2.0 * epsilon)
                err = abs(gflat[k] - fd) / max(abs(gflat[k]) + abs(fd), 1e-6)
                worst = max(worst, err)
    return worst


class MlpModel:
    def __init__(self, arch: MlpArchitecture, params):
        self.arch = arch
        self.params = params

    @classmethod
    def fit(cls, X, y, n_classes, hp, seed):
        arch = MlpArchitecture(tuple(hp["layers"]), hp["activation"], n_classes)
        params = init_params(arch, X.shape[1], seed)
        train_sgd(arch, params, X, y, lr=hp["lr"], batch_size=hp["batch_size"],
                  epochs=hp["epochs"], seed=seed, l2=hp.get("l2", 0.0))
        return cls(arch, params)

    def predict_proba(self, X):
        return forward(self.arch, self.params, X)[0]

    def predict(self, X):
        return np.argmax(self.predict_proba(X), axis=1)

    def state(self) -> dict:
        return {
            "layers": list(self.arch.layer_widths),
            "activation": list(self.arch.activation),
            "n_classes": self.arch.n_classes,
            "weights": [W.tolist() for W, _ in self.params],
            "biases": [b.tolist() for _, b in self.params],
        }

    @classmethod
    def from_state(cls, s):
        arch = MlpArchitecture(tuple(s["layers"]), tuple(s["activation"]), s["n_classes"])
        params = [(np.array(W, dtype=np.float64).reshape(len(W), -1), np.array(b, dtype=np.float64))
                  for W, b in zip(s["weights"], s["biases"])]
        return cls(arch, params)


class LogisticModel(MlpModel):
    @classmethod
    def fit(cls, X, y, n_classes, hp, seed):
        arch = MlpArchitecture((), "relu", n_classes)
        params = [(np.zeros((X.shape[1], n_classes)), np.zeros(n_classes))]
        train_full_batch(arch, params, X, y, lr=hp["lr"], epochs=hp["epochs"], l2=hp["l2"])
        return cls(arch, params)
