"""CMA-ES (full covariance) and its separable diagonal variant.

Internals follow the standard tutorial exposition of the algorithm
(recombination weights, cumulation paths, step-size damping); every constant
is set below and overridable. Minimization convention throughout.

The full-covariance factorization uses Cholesky (C = A A^T) rather than an
eigendecomposition: A z is a valid sampling root, and A^{-1} y whitens y with
the same norm distribution as C^{-1/2} y, at a third of the cubic cost. The
factorization is refreshed every epoch for D <= 1000 and every ceil(D/10)
epochs above, so the amortized per-epoch cost at large D is the O(D^2)
rank-mu update, matching how the algorithm is deployed in practice.
"""

from __future__ import annotations

import logging
import math
from typing import Optional

import numpy as np

from ..core import RngStream
from .base import Optimizer

__all__ = ["CMAOptimizer"]

log = logging.getLogger(__name__)


def _default_weights(population: int, elites: int) -> np.ndarray:
    w = np.log((population + 1) / 2.0) - np.log(np.arange(1, elites + 1))
    return w / w.sum()


class CMAOptimizer(Optimizer):
    """Covariance matrix adaptation evolution strategy behind ask/tell.

    separable=True keeps only diag(C), dropping the cost per epoch from
    O(D^2) to O(D) at the price of axis-aligned sampling.
    """

    name = "cma"
    config_keys = ("sigma", "population", "elites", "separable", "dtype",
                   "c1", "cmu", "c_sigma", "c_c", "d_sigma")

    def __init__(self, init: np.ndarray, sigma: float = 0.3,
                 population: Optional[int] = None, elites: Optional[int] = None,
                 separable: bool = False, rng: Optional[RngStream] = None,
                 dtype=np.float64, c1: Optional[float] = None,
                 cmu: Optional[float] = None, c_sigma: Optional[float] = None,
                 c_c: Optional[float] = None, d_sigma: Optional[float] = None,
                 weights: Optional[np.ndarray] = None):
        init = np.asarray(init, dtype=np.float64)
        super().__init__(init.size, rng)
        D = self.dim
        if sigma <= 0:
            raise ValueError("sigma must be > 0")
        if population is None:
            population = 4 + int(3 * math.log(D))
        if population < 2:
            raise ValueError("population must be >= 2")
        if elites is None:
            elites = population // 2
        if not (1 <= elites <= population):
            raise ValueError("need 1 <= elites <= population")

        self.mean = init.copy()
        self.sigma = float(sigma)
        self.population = int(population)
        self.elites = int(elites)
        self.separable = bool(separable)
        self.dtype = np.dtype(dtype)

        self.weights = (_default_weights(population, elites)
                        if weights is None else np.asarray(weights, dtype=np.float64))
        if self.weights.shape != (self.elites,):
            raise ValueError("need one recombination weight per elite")
        self.mu_eff = 1.0 / np.sum(self.weights ** 2)
        me = self.mu_eff

        self.c_sigma = (me + 2) / (D + me + 5) if c_sigma is None else float(c_sigma)
        self.d_sigma = (1 + 2 * max(0.0, math.sqrt((me - 1) / (D + 1)) - 1) + self.c_sigma
                        if d_sigma is None else float(d_sigma))
        self.c_c = (4 + me / D) / (D + 4 + 2 * me / D) if c_c is None else float(c_c)
        self.c1 = 2.0 / ((D + 1.3) ** 2 + me) if c1 is None else float(c1)
        cmu_default = min(1 - self.c1, 2 * (me - 2 + 1 / me) / ((D + 2) ** 2 + me))
        self.cmu = cmu_default if cmu is None else float(cmu)
        if self.separable:
            # diagonal-only adaptation learns faster along axes
            scale = (D + 2) / 3.0
            self.c1 = min(1.0, self.c1 * scale)
            self.cmu = min(1 - self.c1, self.cmu * scale)
        self.chi_n = math.sqrt(D) * (1 - 1 / (4 * D) + 1 / (21 * D * D))

        if self.separable:
            self.C = np.ones(D, dtype=self.dtype)            # diag(C)
        else:
            self.C = np.eye(D, dtype=self.dtype)
        self.p_sigma = np.zeros(D)
        self.p_c = np.zeros(D)
        self._root: Optional[np.ndarray] = None              # Cholesky factor of C
        self._root_age = 0
        self.factor_interval = 1 if D <= 1000 else math.ceil(D / 10)
        self._z: Optional[np.ndarray] = None
        self._y: Optional[np.ndarray] = None

    @property
    def evals_per_epoch(self) -> int:
        return self.population

    def initial_guess(self) -> np.ndarray:
        return self.mean.copy()

    # -- factorization ------------------------------------------------------
    def _refresh_root(self) -> None:
        if self.separable:
            self._root = np.sqrt(self.C)
            return
        C = self.C
        if not np.all(np.isfinite(C)):
            self._repair("non-finite covariance")
            C = self.C
        try:
            self._root = np.linalg.cholesky(C)
        except np.linalg.LinAlgError:
            self._repair("covariance factorization failed")
            self._root = np.linalg.cholesky(self.C)

    def _repair(self, why: str) -> None:
        """Shift the spectrum by a scaled identity; never crash the run."""
        log.warning("repairing covariance (%s) at epoch %d", why, self.epoch)
        if self.separable:
            self.C = np.where(np.isfinite(self.C) & (self.C > 0), self.C, 1.0)
            return
        C = np.where(np.isfinite(self.C), self.C, 0.0)
        C = (C + C.T) / 2
        bump = 1e-12 + 1e-6 * max(np.trace(C) / self.dim, 1.0)
        C[np.diag_indices_from(C)] += bump
        self.C = C.astype(self.dtype)

    def _root_current(self) -> np.ndarray:
        if self._root is None or self._root_age >= self.factor_interval:
            self._refresh_root()
            self._root_age = 0
        return self._root

    # -- ask/tell -----------------------------------------------------------
    def ask(self) -> np.ndarray:
        A = self._root_current()
        z = self.rng.normal(0.0, 1.0, size=(self.population, self.dim))
        if self.separable:
            y = z * A
        else:
            # multiply in the storage dtype; float32 halves the O(D^2 p) cost
            y = np.asarray(z, dtype=self.dtype) @ A.T
        self._z = z
        self._y = y
        return self.mean + self.sigma * np.asarray(y, dtype=np.float64)

    def _whiten(self, y: np.ndarray) -> np.ndarray:
        """Solve A x = y against the current (possibly stale) root."""
        if self.separable:
            return y / self._root
        from scipy.linalg import solve_triangular
        x = solve_triangular(self._root, np.asarray(y, dtype=self.dtype),
                             lower=True)
        return np.asarray(x, dtype=np.float64)

    def _update(self, candidates, scores):
        D = self.dim
        order = np.argsort(scores, kind="stable")[: self.elites]
        y_elite = self._y[order]                              # (l, D)
        y_w = self.weights @ y_elite

        self.mean = self.mean + self.sigma * y_w

        self.p_sigma = ((1 - self.c_sigma) * self.p_sigma
                        + math.sqrt(self.c_sigma * (2 - self.c_sigma) * self.mu_eff)
                        * self._whiten(y_w))
        t = self.epoch + 1
        ps_norm = np.linalg.norm(self.p_sigma)
        h_sigma = (ps_norm / math.sqrt(1 - (1 - self.c_sigma) ** (2 * t))
                   < (1.4 + 2 / (D + 1)) * self.chi_n)
        self.p_c = ((1 - self.c_c) * self.p_c
                    + (h_sigma and 1.0) * math.sqrt(self.c_c * (2 - self.c_c) * self.mu_eff) * y_w)

        decay = 1 - self.c1 - self.cmu * self.weights.sum()
        delta_h = (1 - h_sigma) * self.c_c * (2 - self.c_c)
        if self.separable:
            rank_mu = self.weights @ (y_elite ** 2)
            self.C = ((decay + self.c1 * delta_h) * self.C
                      + self.c1 * self.p_c ** 2 + self.cmu * rank_mu).astype(self.dtype)
            self.C = np.maximum(self.C, 1e-30)
        else:
            y_el = np.asarray(y_elite, dtype=self.dtype)
            wy = (self.weights[:, None] * y_el).astype(self.dtype, copy=False)
            rank_mu = wy.T @ y_el
            pc = self.p_c.astype(self.dtype)
            # in-place update; C stays symmetric up to rounding, and the
            # Cholesky factorization only reads the lower triangle
            C = self.C
            C *= self.dtype.type(decay + self.c1 * delta_h)
            C += self.dtype.type(self.c1) * np.outer(pc, pc)
            C += self.dtype.type(self.cmu) * rank_mu
            self.C = C

        if self.c_sigma > 0:
            self.sigma *= math.exp((self.c_sigma / self.d_sigma)
                                   * (ps_norm / self.chi_n - 1))
        self._root_age += 1

    # -- diagnostics --------------------------------------------------------
    def covariance(self) -> np.ndarray:
        """Full covariance matrix sigma^2 * C (dense even in separable mode)."""
        if self.separable:
            C = np.diag(self.C)
        else:
            C = np.asarray(self.C, dtype=np.float64)
            C = (C + C.T) / 2
        return self.sigma ** 2 * C

    @classmethod
    def _build(cls, cfg, dim, rng, init):
        if init is None:
            init = np.zeros(dim)
        kwargs = {}
        for k in ("c1", "cmu", "c_sigma", "c_c", "d_sigma"):
            if k in cfg:
                kwargs[k] = float(cfg.pop(k))
        pop = cfg.pop("population", None)
        elites = cfg.pop("elites", None)
        return cls(init, sigma=float(cfg.pop("sigma", 0.3)),
                   population=None if pop is None else int(pop),
                   elites=None if elites is None else int(elites),
                   separable=str(cfg.pop("separable", "false")).lower() in ("1", "true", "yes"),
                   dtype=np.dtype(cfg.pop("dtype", "float64")), rng=rng, **kwargs)
