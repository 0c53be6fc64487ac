"""Shared primitives: parameter vectors, quantization, seeded RNG streams, run records."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

__all__ = [
    "ParamVector",
    "QuantizationSpec",
    "RngStream",
    "RunRecord",
    "as_param_vector",
    "quantize",
    "quantize_array",
    "argbest",
    "records_to_csv",
    "records_from_csv",
    "RUN_RECORD_FIELDS",
]

# A ParamVector is a 1-D float64 ndarray. Optimizers treat it as an opaque
# dense vector; `as_param_vector` is the single admission point that enforces
# finiteness.
ParamVector = np.ndarray


def as_param_vector(values: Iterable[float], dim: Optional[int] = None) -> ParamVector:
    """Validate and convert to a 1-D float64 array.

    Raises ValueError on non-finite entries or a dimension mismatch.
    """
    x = np.asarray(values, dtype=np.float64)
    if x.ndim != 1:
        x = x.reshape(-1)
    if not np.all(np.isfinite(x)):
        raise ValueError("parameter vector contains non-finite entries")
    if dim is not None and x.size != dim:
        raise ValueError(f"expected dimension {dim}, got {x.size}")
    return x


@dataclass(frozen=True)
class QuantizationSpec:
    """Uniform grid of 2**bits levels spanning [lo, hi], endpoints included."""

    bits: int
    lo: float = -1.0
    hi: float = 1.0

    def __post_init__(self):
        if self.bits < 1:
            raise ValueError("bits must be >= 1")
        if not (self.lo < self.hi):
            raise ValueError("need lo < hi")

    @property
    def levels(self) -> int:
        return 2 ** self.bits

    @property
    def step(self) -> float:
        return (self.hi - self.lo) / (self.levels - 1)


def quantize(x: float, spec: QuantizationSpec) -> float:
    """Snap x to the nearest grid level; values outside [lo, hi] clamp first.

    Exact midpoints round toward the higher level.
    """
    if not np.isfinite(x):
        raise ValueError("cannot quantize non-finite value")
    return float(quantize_array(np.asarray([x]), spec)[0])


def quantize_array(x: np.ndarray, spec: QuantizationSpec) -> np.ndarray:
    """Vectorized `quantize`. Input must be finite."""
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise ValueError("cannot quantize non-finite value")
    step = spec.step
    k = np.floor((np.clip(x, spec.lo, spec.hi) - spec.lo) / step + 0.5)
    k = np.clip(k, 0, spec.levels - 1)
    return spec.lo + k * step


def argbest(scores: Sequence[float]) -> int:
    """Index of the minimum score; ties break to the lowest index."""
    s = np.asarray(scores, dtype=np.float64)
    if s.size == 0:
        raise ValueError("argbest of empty sequence")
    if not np.all(np.isfinite(s)):
        raise ValueError("argbest requires finite scores")
    return int(np.argmin(s))


class RngStream:
    """Deterministic random stream keyed by (seed, stream id).

    Backed by a PCG64 generator seeded from ``SeedSequence(seed).spawn``-style
    keys, so identical (seed, stream) pairs reproduce identical draws across
    runs and platforms. Never share one stream mutably between workers; give
    each worker its own stream id.
    """

    def __init__(self, seed: int, stream: int = 0):
        self.seed = int(seed)
        self.stream = int(stream)
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream,))
        self._gen = np.random.Generator(np.random.PCG64(ss))

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    def child(self, stream: int) -> "RngStream":
        """Independent stream derived from the same run seed."""
        return RngStream(self.seed, stream)

    # Pass-throughs used throughout the optimizers.
    def normal(self, *args, **kwargs):
        return self._gen.normal(*args, **kwargs)

    def uniform(self, *args, **kwargs):
        return self._gen.uniform(*args, **kwargs)

    def choice(self, *args, **kwargs):
        return self._gen.choice(*args, **kwargs)

    def shuffle(self, x):
        return self._gen.shuffle(x)

    def integers(self, *args, **kwargs):
        return self._gen.integers(*args, **kwargs)


RUN_RECORD_FIELDS = ("epoch", "evals", "eval_time_s", "update_time_s", "best_score", "test_accuracy")


@dataclass
class RunRecord:
    """One per-epoch log row with cumulative counters and best-so-far score."""

    epoch: int
    evals: int
    eval_time_s: float
    update_time_s: float
    best_score: float
    test_accuracy: Optional[float] = None

    def csv_row(self) -> list:
        acc = "" if self.test_accuracy is None else repr(float(self.test_accuracy))
        return [self.epoch, self.evals, repr(float(self.eval_time_s)),
                repr(float(self.update_time_s)), repr(float(self.best_score)), acc]


def records_to_csv(records: Iterable[RunRecord], fh) -> None:
    """Write records as CSV with the mandatory header row."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(RUN_RECORD_FIELDS)
    for r in records:
        w.writerow(r.csv_row())


def records_from_csv(fh) -> list[RunRecord]:
    r = csv.reader(fh)
    header = next(r)
    if tuple(header) != RUN_RECORD_FIELDS:
        raise ValueError(f"unexpected CSV header: {header}")
    out = []
    for row in r:
        out.append(RunRecord(
            epoch=int(row[0]), evals=int(row[1]),
            eval_time_s=float(row[2]), update_time_s=float(row[3]),
            best_score=float(row[4]),
            test_accuracy=None if row[5] == "" else float(row[5]),
        ))
    return out


def records_csv_string(records: Iterable[RunRecord]) -> str:
    buf = io.StringIO()
    records_to_csv(records, buf)
    return buf.getvalue()
