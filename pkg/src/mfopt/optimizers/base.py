"""Uniform ask/tell optimizer interface and the budgeted run loop."""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np

from ..core import RngStream, RunRecord
from ..objectives import Objective

__all__ = ["Optimizer", "Budget", "RunAbortedError", "run"]


class RunAbortedError(RuntimeError):
    """Objective failure mid-run; partial records are preserved on .records."""

    def __init__(self, msg: str, records: List[RunRecord]):
        super().__init__(msg)
        self.records = records


class Optimizer:
    """Base ask/tell optimizer.

    ask() yields the candidate parameter vectors to evaluate this epoch as a
    (k, D) array; tell(candidates, scores) consumes their losses and updates
    internal state. Scores are losses (lower is better). The best parameters
    ever *evaluated* are tracked here, independent of any distribution mean.

    ask/tell are single-writer and not reentrant.
    """

    name = "base"

    def __init__(self, dim: int, rng: Optional[RngStream] = None):
        self.dim = int(dim)
        self.rng = rng if rng is not None else RngStream(0, 0)
        self.epoch = 0
        self.best_score = np.inf
        self.best_params: Optional[np.ndarray] = None
        self.last_epoch_best = np.inf

    # -- subclass surface ---------------------------------------------------
    def ask(self) -> np.ndarray:
        raise NotImplementedError

    def _update(self, candidates: np.ndarray, scores: np.ndarray) -> None:
        raise NotImplementedError

    @property
    def evals_per_epoch(self) -> int:
        raise NotImplementedError

    def initial_guess(self) -> np.ndarray:
        """Returned when a run ends before anything was evaluated."""
        raise NotImplementedError

    # -- shared machinery ---------------------------------------------------
    def tell(self, candidates: np.ndarray, scores) -> None:
        candidates = np.asarray(candidates, dtype=np.float64)
        scores = np.asarray(scores, dtype=np.float64)
        if scores.shape != (candidates.shape[0],):
            raise ValueError("need one score per candidate")
        if not np.all(np.isfinite(scores)):
            raise RuntimeError(
                f"non-finite objective value at epoch {self.epoch}: "
                f"scores={scores[~np.isfinite(scores)][:4]}")
        i = int(np.argmin(scores))
        self.last_epoch_best = float(scores[i])
        if scores[i] < self.best_score:
            self.best_score = float(scores[i])
            self.best_params = candidates[i].copy()
        self._update(candidates, scores)
        self.epoch += 1

    def step(self, objective: Objective) -> float:
        """One epoch: ask, evaluate, tell. Returns the epoch's best score."""
        cands = self.ask()
        scores = objective.evaluate_population(cands)
        self.tell(cands, scores)
        return self.last_epoch_best

    def best(self) -> np.ndarray:
        return self.best_params if self.best_params is not None else self.initial_guess()

    # -- flat-config construction ------------------------------------------
    #: config keys accepted by from_config, beyond the shared ones
    config_keys: tuple = ()

    @classmethod
    def from_config(cls, cfg: dict, dim: int, rng: RngStream,
                    init: Optional[np.ndarray] = None) -> "Optimizer":
        unknown = set(cfg) - set(cls.config_keys)
        if unknown:
            raise ValueError(f"unknown {cls.name} config keys: {sorted(unknown)}")
        return cls._build(dict(cfg), dim=dim, rng=rng, init=init)

    @classmethod
    def _build(cls, cfg: dict, dim: int, rng: RngStream, init):
        raise NotImplementedError


@dataclass(frozen=True)
class Budget:
    """Stop after the first bound trips. At least one bound must be set."""

    max_epochs: Optional[int] = None
    max_evals: Optional[int] = None
    max_seconds: Optional[float] = None

    def __post_init__(self):
        if self.max_epochs is None and self.max_evals is None and self.max_seconds is None:
            raise ValueError("at least one budget bound must be set")

    def exhausted(self, epochs: int, evals: int, seconds: float) -> bool:
        if self.max_epochs is not None and epochs >= self.max_epochs:
            return True
        if self.max_evals is not None and evals >= self.max_evals:
            return True
        if self.max_seconds is not None and seconds >= self.max_seconds:
            return True
        return False


def run(optimizer: Optimizer, objective: Objective, budget: Budget,
        recorder: Optional[Callable[[RunRecord], None]] = None,
        clock: Callable[[], float] = time.perf_counter,
        accuracy_every: Optional[int] = None,
        ) -> Tuple[List[RunRecord], np.ndarray]:
    """Iterate epochs until the budget trips.

    Wall time is split into objective-evaluation time and optimizer-update
    time (ask + tell). Returns the per-epoch records and the best parameters
    ever evaluated. `clock` is injectable for tests.
    """
    records: List[RunRecord] = []
    evals = 0
    eval_time = 0.0
    update_time = 0.0
    epoch = 0
    while not budget.exhausted(epoch, evals, eval_time + update_time):
        # Don't start an epoch whose evaluations would overshoot max_evals.
        if budget.max_evals is not None and evals + optimizer.evals_per_epoch > budget.max_evals:
            break
        t0 = clock()
        cands = optimizer.ask()
        t1 = clock()
        try:
            scores = objective.evaluate_population(cands)
        except Exception as e:
            raise RunAbortedError(f"objective failed at epoch {epoch}: {e}", records) from e
        t2 = clock()
        try:
            optimizer.tell(cands, scores)
        except RuntimeError as e:
            # non-finite scores are rejected by tell; keep the partial log
            raise RunAbortedError(f"run aborted at epoch {epoch}: {e}",
                                  records) from e
        t3 = clock()
        eval_time += t2 - t1
        update_time += (t1 - t0) + (t3 - t2)
        evals += len(cands)
        acc = None
        if accuracy_every is not None and (epoch + 1) % accuracy_every == 0:
            acc = objective.test_accuracy(optimizer.best())
        rec = RunRecord(epoch=epoch, evals=evals, eval_time_s=eval_time,
                        update_time_s=update_time, best_score=optimizer.best_score,
                        test_accuracy=acc)
        records.append(rec)
        if recorder is not None:
            recorder(rec)
        epoch += 1
    return records, optimizer.best()
