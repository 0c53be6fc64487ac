"""Gradient-descent update rules: vanilla, momentum, and Adam-style adaptive."""

from __future__ import annotations

from typing import Optional

import numpy as np

__all__ = ["UpdateRule"]


class UpdateRule:
    """Stateful descent rule applied as w <- w - alpha * d(g).

    kind:
      vanilla   d = g
      momentum  v <- beta*v + g;              d = v
      adaptive  Adam with (beta1, beta2, eps) and bias correction

    vanilla is exactly momentum with beta=0.
    """

    KINDS = ("vanilla", "momentum", "adaptive")

    def __init__(self, kind: str = "vanilla", alpha: float = 0.01,
                 beta: float = 0.0, beta1: float = 0.9, beta2: float = 0.999,
                 eps: float = 1e-8):
        if kind not in self.KINDS:
            raise ValueError(f"unknown update rule kind {kind!r}")
        if alpha <= 0:
            raise ValueError("alpha must be > 0")
        if not (0.0 <= beta < 1.0):
            raise ValueError("momentum beta must be in [0, 1)")
        self.kind = kind
        self.alpha = float(alpha)
        self.beta = float(beta)
        self.beta1 = float(beta1)
        self.beta2 = float(beta2)
        self.eps = float(eps)
        self._v: Optional[np.ndarray] = None
        self._m: Optional[np.ndarray] = None
        self._s: Optional[np.ndarray] = None
        self._t = 0

    def reset(self) -> None:
        self._v = self._m = self._s = None
        self._t = 0

    def step(self, w: np.ndarray, g: np.ndarray) -> np.ndarray:
        w = np.asarray(w, dtype=np.float64)
        g = np.asarray(g, dtype=np.float64)
        if w.shape != g.shape:
            raise ValueError("w and g must have the same shape")
        if self.kind == "vanilla":
            return w - self.alpha * g
        if self.kind == "momentum":
            if self._v is None:
                self._v = np.zeros_like(w)
            self._v = self.beta * self._v + g
            return w - self.alpha * self._v
        # adaptive (Adam)
        if self._m is None:
            self._m = np.zeros_like(w)
            self._s = np.zeros_like(w)
        self._t += 1
        self._m = self.beta1 * self._m + (1 - self.beta1) * g
        self._s = self.beta2 * self._s + (1 - self.beta2) * g * g
        mhat = self._m / (1 - self.beta1 ** self._t)
        shat = self._s / (1 - self.beta2 ** self._t)
        return w - self.alpha * mhat / (np.sqrt(shat) + self.eps)

    @classmethod
    def from_config(cls, cfg: dict) -> "UpdateRule":
        known = {"kind", "alpha", "beta", "beta1", "beta2", "eps"}
        unknown = set(cfg) - known
        if unknown:
            raise ValueError(f"unknown update-rule keys: {sorted(unknown)}")
        return cls(**{k: (v if k == "kind" else float(v)) for k, v in cfg.items()})
