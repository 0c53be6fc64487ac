"""Perturbative gradient estimators and their descent loops: FD and SPSA."""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from ..core import RngStream
from ..objectives import Objective
from .base import Optimizer
from .update_rules import UpdateRule

__all__ = ["fd_gradient", "spsa_gradient", "FDOptimizer", "SPSAOptimizer"]


def fd_gradient(obj: Objective, w: np.ndarray, subset: Sequence[int],
                epsilon: float) -> np.ndarray:
    """Central-difference gradient on a coordinate subset.

    g_j = (L(w + eps*e_j) - L(w - eps*e_j)) / (2*eps) for j in subset; other
    entries are zero. Performs exactly 2*len(subset) evaluations.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be > 0")
    w = np.asarray(w, dtype=np.float64)
    idx = np.asarray(subset, dtype=np.intp)
    if len(np.unique(idx)) != len(idx):
        raise ValueError("subset indices must be distinct")
    if idx.size and (idx.min() < 0 or idx.max() >= w.size):
        raise ValueError("subset index out of range")
    g = np.zeros_like(w)
    for j in idx:
        wp = w.copy(); wp[j] += epsilon
        wm = w.copy(); wm[j] -= epsilon
        lp = obj(wp)
        lm = obj(wm)
        if not (np.isfinite(lp) and np.isfinite(lm)):
            raise RuntimeError(f"non-finite objective value while probing index {j}")
        g[j] = (lp - lm) / (2.0 * epsilon)
    return g


def spsa_gradient(obj: Objective, w: np.ndarray, epsilon: float,
                  delta: np.ndarray) -> np.ndarray:
    """Simultaneous-perturbation gradient estimate from exactly 2 evaluations.

    g = [(L(w + eps*delta) - L(w - eps*delta)) / (2*eps*VAR(delta))] * delta,
    with VAR(delta) = 1 for the Bernoulli +-1 direction vectors used here.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be > 0")
    w = np.asarray(w, dtype=np.float64)
    delta = np.asarray(delta, dtype=np.float64)
    if delta.shape != w.shape or not np.all(np.abs(delta) == 1.0):
        raise ValueError("delta must be a +-1 vector matching w")
    lp = obj(w + epsilon * delta)
    lm = obj(w - epsilon * delta)
    if not (np.isfinite(lp) and np.isfinite(lm)):
        raise RuntimeError("non-finite objective value during SPSA probe")
    return ((lp - lm) / (2.0 * epsilon)) * delta


class FDOptimizer(Optimizer):
    """Gradient descent on finite-difference estimates over a random subset.

    Each epoch perturbs n_probe unique coordinates (sampled uniformly without
    replacement) and costs exactly 2*n_probe evaluations.
    """

    name = "fd"
    config_keys = ("epsilon", "n_probe", "alpha", "rule", "beta", "beta1", "beta2", "eps")

    def __init__(self, init: np.ndarray, epsilon: float = 1e-3, n_probe: int = 1,
                 rule: Optional[UpdateRule] = None, rng: Optional[RngStream] = None):
        init = np.asarray(init, dtype=np.float64)
        super().__init__(init.size, rng)
        if epsilon <= 0:
            raise ValueError("epsilon must be > 0")
        if not (1 <= n_probe <= init.size):
            raise ValueError("need 1 <= n_probe <= dim")
        self.w = init.copy()
        self.epsilon = float(epsilon)
        self.n_probe = int(n_probe)
        self.rule = rule if rule is not None else UpdateRule("vanilla", alpha=0.01)
        self._subset: Optional[np.ndarray] = None

    @property
    def evals_per_epoch(self) -> int:
        return 2 * self.n_probe

    def initial_guess(self) -> np.ndarray:
        return self.w.copy()

    def ask(self) -> np.ndarray:
        self._subset = np.sort(self.rng.choice(self.dim, size=self.n_probe, replace=False))
        probes = np.empty((2 * self.n_probe, self.dim))
        for k, j in enumerate(self._subset):
            probes[2 * k] = self.w; probes[2 * k, j] += self.epsilon
            probes[2 * k + 1] = self.w; probes[2 * k + 1, j] -= self.epsilon
        return probes

    def _update(self, candidates, scores):
        g = np.zeros(self.dim)
        for k, j in enumerate(self._subset):
            g[j] = (scores[2 * k] - scores[2 * k + 1]) / (2.0 * self.epsilon)
        self.w = self.rule.step(self.w, g)

    @classmethod
    def _build(cls, cfg, dim, rng, init):
        rule = UpdateRule(kind=cfg.pop("rule", "vanilla"),
                          alpha=float(cfg.pop("alpha", 0.01)),
                          beta=float(cfg.pop("beta", 0.0)),
                          beta1=float(cfg.pop("beta1", 0.9)),
                          beta2=float(cfg.pop("beta2", 0.999)),
                          eps=float(cfg.pop("eps", 1e-8)))
        if init is None:
            init = np.zeros(dim)
        return cls(init, epsilon=float(cfg.pop("epsilon", 1e-3)),
                   n_probe=int(cfg.pop("n_probe", 1)), rule=rule, rng=rng)


class SPSAOptimizer(Optimizer):
    """Gradient descent on SPSA estimates; exactly 2 evaluations per epoch.

    The direction vector is Bernoulli +-1; SPSA matches FD with n_probe=1 in
    measurement count while perturbing every coordinate at once.
    """

    name = "spsa"
    config_keys = ("epsilon", "alpha", "rule", "beta", "beta1", "beta2", "eps")

    def __init__(self, init: np.ndarray, epsilon: float = 1e-3,
                 rule: Optional[UpdateRule] = None, rng: Optional[RngStream] = None):
        init = np.asarray(init, dtype=np.float64)
        super().__init__(init.size, rng)
        if epsilon <= 0:
            raise ValueError("epsilon must be > 0")
        self.w = init.copy()
        self.epsilon = float(epsilon)
        self.rule = rule if rule is not None else UpdateRule("vanilla", alpha=0.01)
        self._delta: Optional[np.ndarray] = None

    @property
    def evals_per_epoch(self) -> int:
        return 2

    def initial_guess(self) -> np.ndarray:
        return self.w.copy()

    def ask(self) -> np.ndarray:
        self._delta = self.rng.choice(np.array([-1.0, 1.0]), size=self.dim)
        return np.stack([self.w + self.epsilon * self._delta,
                         self.w - self.epsilon * self._delta])

    def _update(self, candidates, scores):
        g = ((scores[0] - scores[1]) / (2.0 * self.epsilon)) * self._delta
        self.w = self.rule.step(self.w, g)

    @classmethod
    def _build(cls, cfg, dim, rng, init):
        rule = UpdateRule(kind=cfg.pop("rule", "vanilla"),
                          alpha=float(cfg.pop("alpha", 0.01)),
                          beta=float(cfg.pop("beta", 0.0)),
                          beta1=float(cfg.pop("beta1", 0.9)),
                          beta2=float(cfg.pop("beta2", 0.999)),
                          eps=float(cfg.pop("eps", 1e-8)))
        if init is None:
            init = np.zeros(dim)
        return cls(init, epsilon=float(cfg.pop("epsilon", 1e-3)), rule=rule, rng=rng)
