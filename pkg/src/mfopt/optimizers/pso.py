"""Particle swarm optimization with inertia, cognitive, and social pulls."""

from __future__ import annotations

from typing import Optional, Tuple

import numpy as np

from ..core import RngStream
from .base import Optimizer

__all__ = ["PSOOptimizer"]


class PSOOptimizer(Optimizer):
    """Swarm of p particles; per epoch each particle moves by

        v <- omega*v + c1*r1*(p_best - w) + c2*r2*(g_best - w),  w <- w + v

    with r1, r2 drawn fresh per particle and coordinate from U[0, 1].
    Personal and global bests update on strict improvement only. The first
    epoch evaluates the uniformly initialized swarm in place (zero initial
    velocities), so bests exist before the first velocity update.
    """

    name = "pso"
    config_keys = ("population", "omega", "c1", "c2", "init_lo", "init_hi")

    def __init__(self, dim: int, population: int = 20, omega: float = 0.7,
                 c1: float = 1.5, c2: float = 1.5,
                 init_box: Tuple[float, float] = (-1.0, 1.0),
                 rng: Optional[RngStream] = None):
        super().__init__(dim, rng)
        if population < 2:
            raise ValueError("population must be >= 2")
        self.population = int(population)
        self.omega = float(omega)
        self.c1 = float(c1)
        self.c2 = float(c2)
        lo, hi = init_box
        self.positions = self.rng.uniform(lo, hi, size=(self.population, dim))
        self.velocities = np.zeros((self.population, dim))
        self.pbest = self.positions.copy()
        self.pbest_scores = np.full(self.population, np.inf)
        self.gbest = self.positions[0].copy()
        self.gbest_score = np.inf
        self._started = False

    @property
    def evals_per_epoch(self) -> int:
        return self.population

    def initial_guess(self) -> np.ndarray:
        return self.positions[0].copy()

    def ask(self) -> np.ndarray:
        if self._started:
            p, d = self.population, self.dim
            r1 = self.rng.uniform(0.0, 1.0, size=(p, d))
            r2 = self.rng.uniform(0.0, 1.0, size=(p, d))
            self.velocities = (self.omega * self.velocities
                               + self.c1 * r1 * (self.pbest - self.positions)
                               + self.c2 * r2 * (self.gbest - self.positions))
            self.positions = self.positions + self.velocities
        return self.positions.copy()

    def _update(self, candidates, scores):
        self._started = True
        improved = scores < self.pbest_scores
        self.pbest[improved] = candidates[improved]
        self.pbest_scores[improved] = scores[improved]
        i = int(np.argmin(self.pbest_scores))
        if self.pbest_scores[i] < self.gbest_score:
            self.gbest_score = float(self.pbest_scores[i])
            self.gbest = self.pbest[i].copy()

    @classmethod
    def _build(cls, cfg, dim, rng, init):
        box = (float(cfg.pop("init_lo", -1.0)), float(cfg.pop("init_hi", 1.0)))
        return cls(dim, population=int(cfg.pop("population", 20)),
                   omega=float(cfg.pop("omega", 0.7)),
                   c1=float(cfg.pop("c1", 1.5)), c2=float(cfg.pop("c2", 1.5)),
                   init_box=box, rng=rng)
