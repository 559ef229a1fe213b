"""Single-hidden-layer perceptron trained with the fixed recipe:

one hidden layer (ReLU) as wide as the input, 2-way softmax with NLL loss,
SGD at batch size 1 with momentum 0.9, weight decay 5e-4, learning rate
0.001, 50 epochs, and on-the-fly additive Gaussian input noise with
standard deviation sqrt(0.1). Inputs are standardized with training-fold
statistics before they reach the network.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


def _relu(z: np.ndarray) -> np.ndarray:
    return np.maximum(z, 0.0)


def _softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - np.max(z)
    e = np.exp(shifted)
    return e / e.sum()


def init_params(n_inputs: int, n_hidden: int, rng: np.random.Generator) -> dict[str, np.ndarray]:
    """Scaled uniform fan-in initialization; biases start at zero."""
    bound1 = 1.0 / math.sqrt(n_inputs)
    bound2 = 1.0 / math.sqrt(n_hidden)
    return {
        "W1": rng.uniform(-bound1, bound1, size=(n_inputs, n_hidden)),
        "b1": np.zeros(n_hidden),
        "W2": rng.uniform(-bound2, bound2, size=(n_hidden, 2)),
        "b2": np.zeros(2),
    }


def loss_and_grads(params: dict[str, np.ndarray], x: np.ndarray, y: int):
    """NLL of the softmax output for one example, with analytic gradients."""
    z1 = x @ params["W1"] + params["b1"]
    a1 = _relu(z1)
    z2 = a1 @ params["W2"] + params["b2"]
    p = _softmax(z2)
    loss = -math.log(max(p[y], 1e-300))

    dz2 = p.copy()
    dz2[y] -= 1.0
    grads = {
        "W2": np.outer(a1, dz2),
        "b2": dz2,
    }
    da1 = params["W2"] @ dz2
    dz1 = da1 * (z1 > 0.0)
    grads["W1"] = np.outer(x, dz1)
    grads["b1"] = dz1
    return loss, grads


def forward_proba(params: dict[str, np.ndarray], X: np.ndarray) -> np.ndarray:
    """P(class 1) for each row of X."""
    a1 = _relu(X @ params["W1"] + params["b1"])
    z2 = a1 @ params["W2"] + params["b2"]
    shifted = z2 - z2.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e[:, 1] / e.sum(axis=1)


@dataclass
class MlpNet:
    params: dict[str, np.ndarray]
    epoch_losses: list[float] = field(default_factory=list)


def train_mlp(
    X: np.ndarray,
    y: np.ndarray,
    seed: int,
    epochs: int = 50,
    learning_rate: float = 0.001,
    momentum: float = 0.9,
    weight_decay: float = 5e-4,
    noise_std: float = math.sqrt(0.1),
) -> MlpNet:
    """Fit on standardized inputs; hidden width equals the input dimension.

    Records the mean per-example training loss of every epoch. With
    noise_std = 0 and a fixed seed the whole procedure is bit-deterministic.
    """
    n, d = X.shape
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    params = init_params(d, d, rng)
    velocity = {k: np.zeros_like(v) for k, v in params.items()}
    net = MlpNet(params)

    for _ in range(epochs):
        order = rng.permutation(n)
        total = 0.0
        for i in order:
            x = X[i]
            if noise_std > 0.0:
                x = x + rng.normal(0.0, noise_std, size=d)
            loss, grads = loss_and_grads(params, x, int(y[i]))
            total += loss
            for key in ("W1", "b1", "W2", "b2"):
                g = grads[key]
                if weight_decay and key.startswith("W"):
                    g = g + weight_decay * params[key]
                velocity[key] = momentum * velocity[key] + g
                params[key] -= learning_rate * velocity[key]
        net.epoch_losses.append(total / n)
    return net
