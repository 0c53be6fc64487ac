"""Model-free optimizers behind a uniform ask/tell interface."""

from .base import Budget, Optimizer, RunAbortedError, run
from .cma import CMAOptimizer
from .evolution import PEPGOptimizer, SimpleESOptimizer
from .perturbative import FDOptimizer, SPSAOptimizer, fd_gradient, spsa_gradient
from .pso import PSOOptimizer
from .update_rules import UpdateRule

#: registry for flat-config construction; "fd_full" probes every coordinate
OPTIMIZERS = {
    "fd": FDOptimizer,
    "spsa": SPSAOptimizer,
    "simple_es": SimpleESOptimizer,
    "cma": CMAOptimizer,
    "pepg": PEPGOptimizer,
    "pso": PSOOptimizer,
}


def make_optimizer(name: str, cfg: dict, dim: int, rng, init=None) -> Optimizer:
    """Build an optimizer from a flat key-value config section.

    Unknown names and unknown keys are errors. "sep_cma" is shorthand for
    CMA with separable=true.
    """
    cfg = dict(cfg)
    if name == "sep_cma":
        name = "cma"
        cfg["separable"] = "true"
    if name not in OPTIMIZERS:
        raise ValueError(f"unknown optimizer {name!r}; known: {sorted(OPTIMIZERS)} + ['sep_cma']")
    return OPTIMIZERS[name].from_config(cfg, dim=dim, rng=rng, init=init)


__all__ = [
    "Budget", "Optimizer", "RunAbortedError", "run", "UpdateRule",
    "FDOptimizer", "SPSAOptimizer", "SimpleESOptimizer", "CMAOptimizer",
    "PEPGOptimizer", "PSOOptimizer", "OPTIMIZERS", "make_optimizer",
    "fd_gradient", "spsa_gradient",
]
