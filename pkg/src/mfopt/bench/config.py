"""Experiment configuration: INI-style sections with a JSON alternative.

The grammar is the stdlib configparser dialect: `[section]` headers and
`key = value` pairs. A file whose first non-blank character is `{` (or whose
name ends in .json) is parsed as JSON with the same two-level
section -> key -> value structure. Unknown sections and keys are rejected;
the optimizer section is validated by the optimizer's own constructor.
"""

from __future__ import annotations

import configparser
import json
from typing import Dict, List, Optional, Sequence, Union

__all__ = ["ConfigError", "load_config", "parse_config", "validate_config",
           "get_int", "get_float", "get_bool", "get_list", "get_str",
           "EXPERIMENT_KINDS"]

Config = Dict[str, Dict[str, object]]

EXPERIMENT_KINDS = ("rastrigin", "nn", "ceiling", "onn", "scaling", "popscan")


class ConfigError(ValueError):
    pass


# -- typed accessors (values may be strings from INI or native from JSON) ---

def get_str(section: dict, key: str, default: Optional[str] = None) -> Optional[str]:
    v = section.get(key, default)
    return v if v is None else str(v)


def get_int(section: dict, key: str, default: Optional[int] = None) -> Optional[int]:
    v = section.get(key)
    if v is None:
        return default
    try:
        return int(str(v))
    except ValueError:
        raise ConfigError(f"{key}: expected integer, got {v!r}")


def get_float(section: dict, key: str, default: Optional[float] = None) -> Optional[float]:
    v = section.get(key)
    if v is None:
        return default
    try:
        return float(str(v))
    except ValueError:
        raise ConfigError(f"{key}: expected number, got {v!r}")


def get_bool(section: dict, key: str, default: bool = False) -> bool:
    v = section.get(key)
    if v is None:
        return default
    if isinstance(v, bool):
        return v
    s = str(v).strip().lower()
    if s in ("true", "1", "yes", "on"):
        return True
    if s in ("false", "0", "no", "off"):
        return False
    raise ConfigError(f"{key}: expected boolean, got {v!r}")


def get_list(section: dict, key: str,
             default: Optional[Sequence] = None) -> Optional[List[str]]:
    v = section.get(key)
    if v is None:
        return list(default) if default is not None else None
    if isinstance(v, (list, tuple)):
        return [str(x) for x in v]
    items = [s.strip() for s in str(v).split(",") if s.strip()]
    return items


def parse_seeds(value: Union[str, Sequence]) -> List[int]:
    items = value if isinstance(value, (list, tuple)) else \
        [s.strip() for s in str(value).split(",") if s.strip()]
    try:
        return [int(str(s)) for s in items]
    except ValueError:
        raise ConfigError(f"seeds: expected comma-separated integers, got {value!r}")


# -- schema -----------------------------------------------------------------

_EXPERIMENT_KEYS = {"kind", "seeds", "out", "mnist_dir", "accuracy_every"}
_BUDGET_KEYS = {"max_epochs", "max_evals", "max_seconds"}

_OBJECTIVE_KEYS = {
    "rastrigin": {"dim", "amplitude", "noise_sigma", "score_bits"},
    "nn": {"arch", "hidden", "constraint", "bits", "elm", "loss",
           "train_size", "test_size", "batch_size", "chunk", "dtype"},
    "ceiling": {"variants", "hidden", "epochs", "batch_size", "alpha",
                "train_size", "test_size", "elm_sizes", "elm_epochs",
                "ridge_lambda"},
    "onn": {"n_in", "n_modes", "n_out", "mixing_seed", "nonlinearity",
            "input_bits", "weight_bits", "noise_sigma", "score_bits",
            "quantize_scores", "digit", "n_pos", "n_neg", "test_n_pos",
            "test_n_neg", "batch_size", "binarize_threshold"},
    "scaling": {"optimizers", "dimensions", "epochs_per_point", "dtype"},
    "popscan": {"ratios", "arch", "hidden", "loss", "train_size",
                "test_size", "batch_size", "chunk", "dtype"},
}

_SECTIONS = {"experiment", "optimizer", "objective", "budget"}


def validate_config(cfg: Config) -> Config:
    """Structural validation; optimizer hyperparameters are checked later by
    the optimizer's from_config."""
    unknown_sections = set(cfg) - _SECTIONS
    if unknown_sections:
        raise ConfigError(f"unknown sections: {sorted(unknown_sections)}")
    if "experiment" not in cfg:
        raise ConfigError("missing [experiment] section")
    exp = cfg["experiment"]
    extra = set(exp) - _EXPERIMENT_KEYS
    if extra:
        raise ConfigError(f"[experiment]: unknown keys {sorted(extra)}")
    kind = get_str(exp, "kind")
    if kind not in EXPERIMENT_KINDS:
        raise ConfigError(f"[experiment] kind must be one of "
                          f"{EXPERIMENT_KINDS}, got {kind!r}")
    obj = cfg.get("objective", {})
    extra = set(obj) - _OBJECTIVE_KEYS[kind]
    if extra:
        raise ConfigError(f"[objective] for kind={kind}: unknown keys "
                          f"{sorted(extra)}")
    bud = cfg.get("budget", {})
    extra = set(bud) - _BUDGET_KEYS
    if extra:
        raise ConfigError(f"[budget]: unknown keys {sorted(extra)}")
    if kind not in ("ceiling", "scaling") and not bud:
        raise ConfigError(f"kind={kind} requires a [budget] section")
    return cfg


def parse_config(text: str) -> Config:
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"invalid JSON config: {e}")
        if not isinstance(raw, dict) or \
                not all(isinstance(v, dict) for v in raw.values()):
            raise ConfigError("JSON config must map section names to objects")
        return validate_config({str(k): dict(v) for k, v in raw.items()})
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text)
    except configparser.Error as e:
        raise ConfigError(f"invalid config: {e}")
    cfg = {s: dict(parser.items(s)) for s in parser.sections()}
    return validate_config(cfg)


def load_config(path: str) -> Config:
    with open(path) as fh:
        return parse_config(fh.read())
