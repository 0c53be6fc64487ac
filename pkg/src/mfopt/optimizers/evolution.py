"""Population samplers: simple (l,p) evolution strategy and PEPG."""

from __future__ import annotations

from typing import Optional

import numpy as np

from ..core import RngStream
from .base import Optimizer
from .update_rules import UpdateRule

__all__ = ["SimpleESOptimizer", "PEPGOptimizer"]


class SimpleESOptimizer(Optimizer):
    """(l, p) mutation strategy: isotropic Gaussian samples around a mean,
    new mean = average of the l best. l=1 is plain best-candidate selection."""

    name = "simple_es"
    config_keys = ("sigma", "population", "elites")

    def __init__(self, init: np.ndarray, sigma: float = 0.1, population: int = 10,
                 elites: int = 1, rng: Optional[RngStream] = None):
        init = np.asarray(init, dtype=np.float64)
        super().__init__(init.size, rng)
        if sigma <= 0:
            raise ValueError("sigma must be > 0")
        if population < 2:
            raise ValueError("population must be >= 2")
        if not (1 <= elites <= population):
            raise ValueError("need 1 <= elites <= population")
        self.mean = init.copy()
        self.sigma = float(sigma)
        self.population = int(population)
        self.elites = int(elites)

    @property
    def evals_per_epoch(self) -> int:
        return self.population

    def initial_guess(self) -> np.ndarray:
        return self.mean.copy()

    def ask(self) -> np.ndarray:
        eps = self.rng.normal(0.0, self.sigma, size=(self.population, self.dim))
        return self.mean + eps

    def _update(self, candidates, scores):
        order = np.argsort(scores, kind="stable")[: self.elites]
        self.mean = candidates[order].mean(axis=0)

    @classmethod
    def _build(cls, cfg, dim, rng, init):
        if init is None:
            init = np.zeros(dim)
        return cls(init, sigma=float(cfg.pop("sigma", 0.1)),
                   population=int(cfg.pop("population", 10)),
                   elites=int(cfg.pop("elites", 1)), rng=rng)


class PEPGOptimizer(Optimizer):
    """Parameter-exploring policy gradients on a factored Gaussian (mu, sigma).

    Losses are negated into rewards internally (the module boundary stays
    minimize-only) and baseline-subtracted by the population mean. Gradient
    estimates follow the Gaussian log-derivative identities
        d/dmu    ln P = (w - mu) / sigma^2
        d/dsigma ln P = ((w - mu)^2 - sigma^2) / sigma^3
    averaged over the population. mu ascends through an UpdateRule (momentum
    by default); sigma takes a plain ascent step, then a multiplicative decay
    and an elementwise floor keep it positive and shrinking over time, which
    counters the 1/sigma growth of the raw estimator near convergence.
    """

    name = "pepg"
    config_keys = ("sigma_init", "population", "alpha_mu", "alpha_sigma",
                   "sigma_decay", "momentum", "sigma_floor", "mirrored",
                   "mu_rule")

    def __init__(self, init: np.ndarray, sigma_init: float = 0.1,
                 population: int = 20, alpha_mu: float = 0.1,
                 alpha_sigma: float = 0.05, sigma_decay: float = 0.999,
                 momentum: float = 0.9, sigma_floor: float = 1e-4,
                 mirrored: bool = False, rng: Optional[RngStream] = None,
                 mu_rule: Optional[UpdateRule] = None):
        init = np.asarray(init, dtype=np.float64)
        super().__init__(init.size, rng)
        if population < 2:
            raise ValueError("population must be >= 2")
        if mirrored and population % 2:
            raise ValueError("mirrored sampling needs an even population")
        if not (0.0 < sigma_decay <= 1.0):
            raise ValueError("sigma_decay must be in (0, 1]")
        if sigma_floor <= 0:
            raise ValueError("sigma_floor must be > 0")
        self.mu = init.copy()
        self.sigma = np.full(self.dim, float(sigma_init))
        if np.any(self.sigma < sigma_floor):
            self.sigma = np.maximum(self.sigma, sigma_floor)
        self.population = int(population)
        self.alpha_mu = float(alpha_mu)
        self.alpha_sigma = float(alpha_sigma)
        self.sigma_decay = float(sigma_decay)
        self.sigma_floor = float(sigma_floor)
        self.mirrored = bool(mirrored)
        self.mu_rule = mu_rule if mu_rule is not None else UpdateRule(
            "momentum", alpha=alpha_mu, beta=momentum)

    @property
    def evals_per_epoch(self) -> int:
        return self.population

    def initial_guess(self) -> np.ndarray:
        return self.mu.copy()

    def ask(self) -> np.ndarray:
        if self.mirrored:
            half = self.population // 2
            d = self.sigma * self.rng.normal(0.0, 1.0, size=(half, self.dim))
            return np.concatenate([self.mu + d, self.mu - d])
        z = self.rng.normal(0.0, 1.0, size=(self.population, self.dim))
        return self.mu + self.sigma * z

    def _update(self, candidates, scores):
        rewards = -scores
        rewards = rewards - rewards.mean()
        diff = candidates - self.mu              # (p, D)
        inv_s2 = 1.0 / (self.sigma ** 2)
        grad_mu = (rewards @ diff) / self.population * inv_s2
        grad_sigma = (rewards @ (diff ** 2 - self.sigma ** 2)) / self.population \
            / (self.sigma ** 3)
        # gradient ascent on J: feed the rule the descent direction -grad
        self.mu = self.mu_rule.step(self.mu, -grad_mu)
        self.sigma = self.sigma + self.alpha_sigma * grad_sigma
        self.sigma = np.maximum(self.sigma * self.sigma_decay, self.sigma_floor)

    @classmethod
    def _build(cls, cfg, dim, rng, init):
        if init is None:
            init = np.zeros(dim)
        kwargs = dict(
            sigma_init=float(cfg.pop("sigma_init", 0.1)),
            population=int(cfg.pop("population", 20)),
            alpha_mu=float(cfg.pop("alpha_mu", 0.1)),
            alpha_sigma=float(cfg.pop("alpha_sigma", 0.05)),
            sigma_decay=float(cfg.pop("sigma_decay", 0.999)),
            momentum=float(cfg.pop("momentum", 0.9)),
            sigma_floor=float(cfg.pop("sigma_floor", 1e-4)),
            mirrored=str(cfg.pop("mirrored", "false")).lower() in ("1", "true", "yes"),
        )
        rule_kind = cfg.pop("mu_rule", None)
        rule = None
        if rule_kind is not None:
            rule = UpdateRule(rule_kind, alpha=kwargs["alpha_mu"], beta=kwargs["momentum"])
        return cls(init, rng=rng, mu_rule=rule, **kwargs)
