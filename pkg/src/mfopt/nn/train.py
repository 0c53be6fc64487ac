"""Gradient-based reference training: backprop + ridge regression.

These trainers provide the white-box baselines that the black-box optimizers
are compared against, and the frozen-feature ridge fit used by extreme
learning machines.
"""

from __future__ import annotations

from typing import Callable, Optional, Tuple

import numpy as np

from ..core import RngStream
from ..optimizers.update_rules import UpdateRule
from . import network as net
from .network import NetworkSpec

__all__ = ["softmax_cross_entropy", "mse_loss", "loss_and_grad",
           "backprop_train", "ridge_fit", "one_hot"]


def one_hot(y: np.ndarray, n_classes: int) -> np.ndarray:
    y = np.asarray(y, dtype=np.intp)
    out = np.zeros((y.size, n_classes))
    out[np.arange(y.size), y] = 1.0
    return out


def softmax_cross_entropy(logits: np.ndarray, y: np.ndarray) -> Tuple[float, np.ndarray]:
    """Mean cross-entropy over the batch and its gradient w.r.t. logits.

    y holds integer class labels.
    """
    z = logits - logits.max(axis=1, keepdims=True)
    ez = np.exp(z)
    p = ez / ez.sum(axis=1, keepdims=True)
    n = logits.shape[0]
    y = np.asarray(y, dtype=np.intp)
    loss = -np.log(np.maximum(p[np.arange(n), y], 1e-300)).mean()
    dp = p.copy()
    dp[np.arange(n), y] -= 1.0
    return float(loss), dp / n


def mse_loss(out: np.ndarray, target: np.ndarray) -> Tuple[float, np.ndarray]:
    """Mean squared error over all entries and its gradient w.r.t. out."""
    diff = out - target
    return float(np.mean(diff ** 2)), 2.0 * diff / diff.size


def loss_and_grad(spec: NetworkSpec, params: np.ndarray, X: np.ndarray,
                  y: np.ndarray, loss: str = "cross_entropy") -> Tuple[float, np.ndarray]:
    """One full forward/backward pass; gradient is w.r.t. stored params.

    For quantized networks the gradient flows straight through the
    quantizer (STE); for positive-only networks it is scaled by sign(w).
    """
    caches: list = []
    out = net.forward(spec, params, X, caches=caches)
    if loss == "cross_entropy":
        value, dy = softmax_cross_entropy(out, y)
    elif loss == "mse":
        value, dy = mse_loss(out, y)
    else:
        raise ValueError(f"unknown loss {loss!r}")
    return value, net.backward(spec, params, caches, dy)


def backprop_train(spec: NetworkSpec, X: np.ndarray, y: np.ndarray,
                   epochs: int = 10, batch_size: int = 64,
                   loss: str = "cross_entropy",
                   rule: Optional[UpdateRule] = None,
                   rng: Optional[RngStream] = None,
                   init: Optional[np.ndarray] = None,
                   callback: Optional[Callable[[int, float, np.ndarray], None]] = None,
                   ) -> np.ndarray:
    """Minibatch gradient training; returns the trained stored parameters.

    Frozen layers (per spec.trainable) receive no updates. rule defaults to
    Adam with step 1e-3.
    """
    rng = rng if rng is not None else RngStream(0, 0)
    rule = rule if rule is not None else UpdateRule("adaptive", alpha=1e-3)
    rule.reset()
    w = spec.init_params(rng) if init is None else np.asarray(init, dtype=np.float64).copy()
    n = len(X)
    frozen = None
    if spec.trainable is not None:
        frozen = np.zeros(spec.n_params, dtype=bool)
        for i, s in enumerate(spec.slices()):
            if not spec.layer_trainable(i):
                frozen[s] = True
    for epoch in range(epochs):
        order = rng.generator.permutation(n)
        total = 0.0
        for lo in range(0, n, batch_size):
            idx = order[lo:lo + batch_size]
            value, g = loss_and_grad(spec, w, X[idx], y[idx], loss=loss)
            if frozen is not None:
                g[frozen] = 0.0
            w = rule.step(w, g)
            total += value * len(idx)
        if callback is not None:
            callback(epoch, total / n, w)
    return w


def ridge_fit(H: np.ndarray, T: np.ndarray, lam: float = 1e-6) -> np.ndarray:
    """Solve min_W ||H W - T||^2 + lam ||W||^2 in closed form.

    H: (n, f) features (append a ones column for a bias), T: (n, k) targets.
    With lam == 0 a singular normal matrix raises LinAlgError instead of
    silently returning a least-norm solution.
    """
    H = np.asarray(H, dtype=np.float64)
    T = np.asarray(T, dtype=np.float64)
    A = H.T @ H
    if lam:
        A = A + lam * np.eye(H.shape[1])
        return np.linalg.solve(A, H.T @ T)
    # lam == 0: demand an actually invertible system
    return np.linalg.solve(A, H.T @ T)
