"""Benchmark objectives and composable wrappers (noise, counting, score quantization).

Scores are losses: lower is better, everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from .core import ParamVector, QuantizationSpec, RngStream, quantize_array

__all__ = ["Objective", "FunctionObjective", "RastriginSpec", "rastrigin",
           "RastriginObjective", "SphereObjective", "wrap", "WrappedObjective"]


class Objective:
    """Evaluation contract: maps a ParamVector to a scalar loss.

    Subclasses implement `_evaluate`. Calling the objective increments the
    evaluation counter by exactly 1. `evaluate_population` evaluates a 2-D
    (p, D) batch and counts p evaluations; subclasses may override it with a
    vectorized path.
    """

    dim: int
    #: uniform initialization box (lo, hi) used by swarm/population inits
    init_box: Tuple[float, float] = (-1.0, 1.0)

    def __init__(self, dim: int):
        self.dim = int(dim)
        self.evals = 0

    def _evaluate(self, x: np.ndarray) -> float:
        raise NotImplementedError

    def __call__(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.dim,):
            raise ValueError(f"expected shape ({self.dim},), got {x.shape}")
        self.evals += 1
        return float(self._evaluate(x))

    def evaluate_population(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.float64)
        if xs.ndim != 2 or xs.shape[1] != self.dim:
            raise ValueError(f"expected shape (p, {self.dim}), got {xs.shape}")
        return np.array([self(x) for x in xs], dtype=np.float64)

    def test_accuracy(self, x: np.ndarray) -> Optional[float]:
        """Accuracy probe; does not touch the evaluation counter. None if N/A."""
        return None


class FunctionObjective(Objective):
    """Adapter for a plain callable f(x) -> float."""

    def __init__(self, fn: Callable[[np.ndarray], float], dim: int,
                 init_box: Tuple[float, float] = (-1.0, 1.0)):
        super().__init__(dim)
        self._fn = fn
        self.init_box = init_box

    def _evaluate(self, x):
        return self._fn(x)


@dataclass(frozen=True)
class RastriginSpec:
    A: float = 10.0
    n: int = 2

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.A <= 0:
            raise ValueError("A must be > 0")


def rastrigin(x: ParamVector, spec: RastriginSpec) -> float:
    """A*n + sum_i (x_i^2 - A*cos(2*pi*x_i)); global minimum 0 at the origin."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (spec.n,):
        raise ValueError(f"expected dimension {spec.n}, got shape {x.shape}")
    return float(spec.A * spec.n + np.sum(x * x - spec.A * np.cos(2.0 * np.pi * x)))


class RastriginObjective(Objective):
    """Rastrigin with the canonical [-5.12, 5.12] initialization box."""

    def __init__(self, n: int, A: float = 10.0):
        super().__init__(n)
        self.spec = RastriginSpec(A=A, n=n)
        self.init_box = (-5.12, 5.12)

    def _evaluate(self, x):
        return rastrigin(x, self.spec)

    def evaluate_population(self, xs):
        xs = np.asarray(xs, dtype=np.float64)
        if xs.ndim != 2 or xs.shape[1] != self.dim:
            raise ValueError(f"expected shape (p, {self.dim}), got {xs.shape}")
        self.evals += xs.shape[0]
        A = self.spec.A
        return A * self.dim + np.sum(xs * xs - A * np.cos(2.0 * np.pi * xs), axis=1)


class SphereObjective(Objective):
    """Convex sanity-check objective sum_i x_i^2."""

    def __init__(self, dim: int, init_box: Tuple[float, float] = (-3.0, 3.0)):
        super().__init__(dim)
        self.init_box = init_box

    def _evaluate(self, x):
        return float(np.dot(x, x))

    def evaluate_population(self, xs):
        xs = np.asarray(xs, dtype=np.float64)
        self.evals += xs.shape[0]
        return np.sum(xs * xs, axis=1)


class WrappedObjective(Objective):
    """Adds Gaussian readout noise and optional score quantization to an inner objective.

    With sigma=0 and no quantization this is an exact identity apart from the
    evaluation counter. The wrapper's counter tracks its own evaluations; the
    inner counter keeps counting too.
    """

    def __init__(self, inner: Objective, noise_sigma: float = 0.0,
                 score_quantization: Optional[QuantizationSpec] = None,
                 rng: Optional[RngStream] = None):
        if noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        super().__init__(inner.dim)
        self.inner = inner
        self.noise_sigma = float(noise_sigma)
        self.score_quantization = score_quantization
        self.rng = rng if rng is not None else RngStream(0, 0)
        self.init_box = inner.init_box

    def _postprocess(self, s: np.ndarray) -> np.ndarray:
        if self.noise_sigma > 0:
            s = s + self.rng.normal(0.0, self.noise_sigma, size=s.shape)
        if self.score_quantization is not None:
            s = quantize_array(s, self.score_quantization)
        return s

    def _evaluate(self, x):
        s = np.asarray([self.inner(x)])
        return float(self._postprocess(s)[0])

    def evaluate_population(self, xs):
        xs = np.asarray(xs, dtype=np.float64)
        self.evals += xs.shape[0]
        return self._postprocess(self.inner.evaluate_population(xs))

    def test_accuracy(self, x):
        return self.inner.test_accuracy(x)


def wrap(inner: Objective, noise_sigma: float = 0.0,
         q: Optional[QuantizationSpec] = None,
         rng: Optional[RngStream] = None) -> WrappedObjective:
    return WrappedObjective(inner, noise_sigma, q, rng)
