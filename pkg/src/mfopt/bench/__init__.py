"""Benchmark harness: experiment configs, seeded runs, scaling scans, CLI."""

from .config import ConfigError, load_config, validate_config
from .harness import (popscan, run_ceiling, run_experiment, scaling_scan,
                      trivial_objective)

__all__ = ["ConfigError", "load_config", "validate_config",
           "popscan", "run_ceiling", "run_experiment", "scaling_scan",
           "trivial_objective"]
