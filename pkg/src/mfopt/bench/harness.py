"""Experiment execution: seeded runs, artifact emission, scaling scans."""

from __future__ import annotations

import json
import logging
import math
import os
import time
from dataclasses import asdict, dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .. import __version__, data as data_mod, nn, onn as onn_mod
from ..core import QuantizationSpec, RngStream, RunRecord, records_to_csv
from ..objectives import Objective, RastriginObjective, WrappedObjective
from ..optimizers import Budget, RunAbortedError, make_optimizer, run
from ..optimizers.update_rules import UpdateRule
from .config import (ConfigError, get_bool, get_float, get_int, get_list,
                     get_str, parse_seeds)

log = logging.getLogger(__name__)

__all__ = ["trivial_objective", "run_experiment", "run_ceiling",
           "scaling_scan", "popscan", "ScalingResult", "fit_loglog",
           "default_population"]


# -- shared helpers ---------------------------------------------------------

class _FirstCoordinate(Objective):
    """Constant-time objective for overhead timing: returns x[0]."""

    def _evaluate(self, x):
        return float(x[0])

    def evaluate_population(self, xs):
        xs = np.asarray(xs, dtype=np.float64)
        self.evals += xs.shape[0]
        return xs[:, 0].astype(np.float64)


def trivial_objective(dim: int) -> Objective:
    return _FirstCoordinate(dim)


def default_population(dim: int) -> int:
    """p = 10 up to D = 1000, then ceil(0.01 * D)."""
    return 10 if dim <= 1000 else math.ceil(0.01 * dim)


def fit_loglog(dims: Sequence[float], times: Sequence[float]
               ) -> Tuple[float, float, float]:
    """Least-squares slope/intercept/R^2 of log(time) vs log(dim)."""
    x = np.log(np.asarray(dims, dtype=np.float64))
    y = np.log(np.asarray(times, dtype=np.float64))
    if x.size < 2:
        raise ValueError("need at least 2 points to fit")
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - float(np.sum(resid ** 2)) / ss_tot
    return float(slope), float(intercept), float(r2)


def _load_mnist_arrays(mnist_dir: str, flat: bool, train_size: Optional[int],
                       test_size: Optional[int], seed: int
                       ) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """MNIST scaled to [0,1]; optional seeded subsampling; flat or NCHW."""
    tr = data_mod.load_mnist(mnist_dir, "train")
    te = data_mod.load_mnist(mnist_dir, "test")

    def prep(ds, size, stream):
        X = ds.images.astype(np.float64) / 255.0
        y = ds.labels
        if size is not None and size < len(X):
            idx = RngStream(seed, stream).choice(len(X), size=size, replace=False)
            X, y = X[idx], y[idx]
        X = X.reshape(len(X), -1) if flat else X[:, None, :, :]
        return X, y

    Xtr, ytr = prep(tr, train_size, 100)
    Xte, yte = prep(te, test_size, 101)
    return Xtr, ytr, Xte, yte


def _resolve_mnist_dir(exp: dict, override: Optional[str]) -> str:
    d = override or get_str(exp, "mnist_dir") or os.environ.get("MFOPT_MNIST_DIR")
    if not d:
        raise ConfigError("this experiment needs MNIST: pass --mnist-dir, set "
                          "mnist_dir in [experiment], or export MFOPT_MNIST_DIR")
    return d


def _network_spec(obj_cfg: dict) -> nn.NetworkSpec:
    arch = get_str(obj_cfg, "arch", "convnet")
    constraint = get_str(obj_cfg, "constraint", "none")
    bits = get_int(obj_cfg, "bits")
    if arch == "convnet":
        spec = nn.table_convnet(constraint=constraint, bits=bits)
    elif arch == "ffnn":
        spec = nn.ffnn(get_int(obj_cfg, "hidden", 100),
                       constraint=constraint, bits=bits)
    elif arch == "iris":
        spec = nn.iris_ffnn()
    else:
        raise ConfigError(f"unknown arch {arch!r}")
    if get_bool(obj_cfg, "elm", False):
        spec = nn.elm_freeze(spec)
    return spec


def _build_objective(kind: str, obj_cfg: dict, seed: int,
                     mnist_dir: Optional[str]) -> Tuple[Objective, np.ndarray]:
    """Returns (objective, initial parameter vector for the optimizer)."""
    rng = RngStream(seed, 50)
    if kind == "rastrigin":
        dim = get_int(obj_cfg, "dim")
        if dim is None:
            raise ConfigError("rastrigin objective needs dim")
        obj: Objective = RastriginObjective(dim, A=get_float(obj_cfg, "amplitude", 10.0))
        sigma = get_float(obj_cfg, "noise_sigma", 0.0)
        bits = get_int(obj_cfg, "score_bits")
        if sigma > 0 or bits is not None:
            q = None
            if bits is not None:
                # calibrated over the init box's worst case
                hi = float(obj(np.full(dim, 5.12)))
                obj.evals -= 1
                q = QuantizationSpec(bits, 0.0, hi)
            obj = WrappedObjective(obj, noise_sigma=sigma,
                                   score_quantization=q, rng=rng.child(51))
        lo, hi = obj.init_box
        init = rng.uniform(lo, hi, size=dim)
        return obj, init

    if kind in ("nn", "popscan"):
        spec = _network_spec(obj_cfg)
        arch = get_str(obj_cfg, "arch", "convnet")
        if arch == "iris":
            Xtr, ytr, Xte, yte = data_mod.iris_builtin()
        else:
            Xtr, ytr, Xte, yte = _load_mnist_arrays(
                _resolve_mnist_dir({}, mnist_dir), flat=(arch == "ffnn"),
                train_size=get_int(obj_cfg, "train_size"),
                test_size=get_int(obj_cfg, "test_size"), seed=seed)
        obj = nn.as_objective(
            spec, Xtr, ytr, loss=get_str(obj_cfg, "loss", "cross_entropy"),
            batch_size=get_int(obj_cfg, "batch_size"), rng=rng,
            test_data=(Xte, yte), chunk=get_int(obj_cfg, "chunk", 64),
            dtype=get_str(obj_cfg, "dtype", "float64"))
        return obj, obj.initial_trainable()

    if kind == "onn":
        tr = data_mod.load_mnist(_resolve_mnist_dir({}, mnist_dir), "train")
        te = data_mod.load_mnist(_resolve_mnist_dir({}, mnist_dir), "test")
        thr = get_float(obj_cfg, "binarize_threshold", 0.5)
        tr, te = data_mod.binarize(tr, thr), data_mod.binarize(te, thr)
        digit = get_int(obj_cfg, "digit", 8)
        task = data_mod.one_vs_all(tr, digit, get_int(obj_cfg, "n_pos", 1000),
                                   get_int(obj_cfg, "n_neg", 1000), seed=seed)
        test_task = data_mod.one_vs_all(te, digit,
                                        get_int(obj_cfg, "test_n_pos", 500),
                                        get_int(obj_cfg, "test_n_neg", 500),
                                        seed=seed + 10_000)
        cfg = onn_mod.OnnConfig(
            n_pixels=int(np.prod(task.X.shape[1:])),
            n_in=get_int(obj_cfg, "n_in", 400),
            n_modes=get_int(obj_cfg, "n_modes", 2500),
            n_out=get_int(obj_cfg, "n_out", 2500),
            mixing_seed=get_int(obj_cfg, "mixing_seed", 0),
            nonlinearity=get_str(obj_cfg, "nonlinearity", "saturable"),
            input_bits=get_int(obj_cfg, "input_bits", 10),
            weight_bits=get_int(obj_cfg, "weight_bits", 8),
            noise_sigma=get_float(obj_cfg, "noise_sigma", 0.0),
            score_bits=get_int(obj_cfg, "score_bits", 8),
            quantize_scores=get_bool(obj_cfg, "quantize_scores", True))
        obj = onn_mod.onn_objective(cfg, task.X.reshape(len(task.X), -1), task.y,
                                    batch_size=get_int(obj_cfg, "batch_size"),
                                    rng=rng,
                                    test_data=(test_task.X.reshape(len(test_task.X), -1),
                                               test_task.y))
        init = np.concatenate([rng.uniform(0.0, 2 * np.pi, cfg.n_in),
                               rng.uniform(-0.1, 0.1, cfg.n_out)])
        return obj, init

    raise ConfigError(f"no objective builder for kind {kind!r}")


def _budget_from_cfg(bud: dict) -> Budget:
    return Budget(max_epochs=get_int(bud, "max_epochs"),
                  max_evals=get_int(bud, "max_evals"),
                  max_seconds=get_float(bud, "max_seconds"))


# -- run_experiment ---------------------------------------------------------

def _seed_entry(seed: int, records: List[RunRecord], obj: Objective,
                best: Optional[np.ndarray], csv_name: str,
                error: Optional[str] = None) -> dict:
    entry: Dict[str, object] = {"seed": seed, "csv": csv_name, "error": error,
                                "epochs": len(records),
                                "total_evals": records[-1].evals if records else 0,
                                "total_seconds": (records[-1].eval_time_s
                                                  + records[-1].update_time_s)
                                if records else 0.0,
                                "best_score": min((r.best_score for r in records),
                                                  default=None)}
    acc = None
    if best is not None and error is None:
        try:
            acc = obj.test_accuracy(best)
        except Exception as e:  # accuracy probe failure should not kill the run
            log.warning("accuracy probe failed for seed %d: %s", seed, e)
    entry["final_test_accuracy"] = acc
    return entry


def run_experiment(cfg: dict, out_dir: Optional[str] = None,
                   seeds: Optional[Sequence[int]] = None,
                   mnist_dir: Optional[str] = None) -> dict:
    """Execute one config across its seeds; write per-seed CSVs + summary.json.

    Returns the summary dict; summary["failed"] is True if any seed errored.
    """
    exp = cfg["experiment"]
    kind = get_str(exp, "kind")
    if kind == "ceiling":
        return run_ceiling(cfg, out_dir=out_dir, seeds=seeds, mnist_dir=mnist_dir)
    if kind == "scaling":
        return _run_scaling_experiment(cfg, out_dir=out_dir)
    if kind == "popscan":
        return _run_popscan_experiment(cfg, out_dir=out_dir, seeds=seeds,
                                       mnist_dir=mnist_dir)

    out = out_dir or get_str(exp, "out", "runs/out")
    os.makedirs(out, exist_ok=True)
    seed_list = list(seeds) if seeds is not None else \
        parse_seeds(exp.get("seeds", "0"))
    accuracy_every = get_int(exp, "accuracy_every")
    opt_cfg = dict(cfg.get("optimizer", {}))
    opt_name = str(opt_cfg.pop("name", "")) or None
    if opt_name is None:
        raise ConfigError("[optimizer] section needs a name")
    budget = _budget_from_cfg(cfg.get("budget", {}))
    mnist_dir = mnist_dir or get_str(exp, "mnist_dir")

    entries = []
    best_overall = None
    for seed in seed_list:
        csv_name = f"seed{seed}.csv"
        records: List[RunRecord] = []
        try:
            obj, init = _build_objective(kind, cfg.get("objective", {}),
                                         seed, mnist_dir)
            opt = make_optimizer(opt_name, opt_cfg, dim=obj.dim,
                                 rng=RngStream(seed, 0), init=init)
            records, best = run(opt, obj, budget,
                                accuracy_every=accuracy_every)
            entry = _seed_entry(seed, records, obj, best, csv_name)
        except RunAbortedError as e:
            records = e.records
            entry = _seed_entry(seed, records, None, None, csv_name, error=str(e))
            log.error("seed %d aborted: %s", seed, e)
        except Exception as e:
            entry = _seed_entry(seed, records, None, None, csv_name, error=str(e))
            log.error("seed %d failed: %s", seed, e)
        with open(os.path.join(out, csv_name), "w") as fh:
            records_to_csv(records, fh)
        entries.append(entry)
        if entry["best_score"] is not None and \
                (best_overall is None or entry["best_score"] < best_overall):
            best_overall = entry["best_score"]

    summary = {
        "kind": kind, "version": __version__, "config": cfg,
        "seeds": seed_list, "runs": entries, "best_score": best_overall,
        "failed": any(e["error"] for e in entries),
    }
    with open(os.path.join(out, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=1, default=float)
    return summary


# -- ceiling analysis -------------------------------------------------------

CEILING_VARIANTS = ("backprop", "positive_only", "quantized4", "quantized2",
                    "elm", "ridge")


def _ceiling_variant_spec(variant: str, hidden: int) -> nn.NetworkSpec:
    if variant == "backprop":
        return nn.ffnn(hidden)
    if variant == "positive_only":
        return nn.ffnn(hidden, constraint="positive_only")
    if variant == "quantized4":
        return nn.ffnn(hidden, constraint="quantized", bits=4)
    if variant == "quantized2":
        return nn.ffnn(hidden, constraint="quantized", bits=2)
    if variant == "elm":
        return nn.elm_freeze(nn.ffnn(hidden))
    raise ValueError(f"unknown ceiling variant {variant!r}")


def ceiling_variant_accuracy(variant: str, Xtr, ytr, Xte, yte, seed: int,
                             hidden: int = 100, epochs: int = 15,
                             batch_size: int = 64, alpha: float = 1e-3,
                             elm_epochs: Optional[int] = None,
                             ridge_lambda: float = 1e-2,
                             recorder: Optional[Callable[[RunRecord], None]] = None
                             ) -> float:
    """Train one ceiling-analysis variant and return its test accuracy."""
    if variant == "ridge":
        H = np.hstack([Xtr, np.ones((len(Xtr), 1))])
        W = nn.ridge_fit(H, nn.one_hot(ytr, 10), lam=ridge_lambda)
        pred = (np.hstack([Xte, np.ones((len(Xte), 1))]) @ W).argmax(axis=1)
        acc = float((pred == yte).mean())
        if recorder is not None:
            recorder(RunRecord(0, len(Xtr), 0.0, 0.0, 0.0, acc))
        return acc
    spec = _ceiling_variant_spec(variant, hidden)
    rng = RngStream(seed, 60)
    n_epochs = elm_epochs if (variant == "elm" and elm_epochs) else epochs
    t_start = time.perf_counter()

    def cb(epoch, train_loss, w):
        if recorder is not None:
            acc_e = float((nn.forward(spec, w, Xte).argmax(axis=1) == yte).mean())
            recorder(RunRecord(epoch, (epoch + 1) * len(Xtr), 0.0,
                               time.perf_counter() - t_start, train_loss, acc_e))

    w = nn.backprop_train(spec, Xtr, ytr, epochs=n_epochs,
                          batch_size=batch_size,
                          rule=UpdateRule("adaptive", alpha=alpha), rng=rng,
                          callback=cb)
    return float((nn.forward(spec, w, Xte).argmax(axis=1) == yte).mean())


def run_ceiling(cfg: dict, out_dir: Optional[str] = None,
                seeds: Optional[Sequence[int]] = None,
                mnist_dir: Optional[str] = None) -> dict:
    """Train the accuracy-ceiling variants and emit accuracies per seed."""
    exp = cfg["experiment"]
    obj_cfg = cfg.get("objective", {})
    out = out_dir or get_str(exp, "out", "runs/ceiling")
    os.makedirs(out, exist_ok=True)
    seed_list = list(seeds) if seeds is not None else \
        parse_seeds(exp.get("seeds", "0"))
    variants = get_list(obj_cfg, "variants", CEILING_VARIANTS)
    unknown = set(variants) - set(CEILING_VARIANTS)
    if unknown:
        raise ConfigError(f"unknown ceiling variants {sorted(unknown)}")
    Xtr, ytr, Xte, yte = _load_mnist_arrays(
        _resolve_mnist_dir(exp, mnist_dir), flat=True,
        train_size=get_int(obj_cfg, "train_size"),
        test_size=get_int(obj_cfg, "test_size"), seed=0)
    kwargs = dict(hidden=get_int(obj_cfg, "hidden", 100),
                  epochs=get_int(obj_cfg, "epochs", 15),
                  batch_size=get_int(obj_cfg, "batch_size", 64),
                  alpha=get_float(obj_cfg, "alpha", 1e-3),
                  elm_epochs=get_int(obj_cfg, "elm_epochs"),
                  ridge_lambda=get_float(obj_cfg, "ridge_lambda", 1e-2))

    results: Dict[str, dict] = {v: {} for v in variants}
    failed = False
    for seed in seed_list:
        for variant in variants:
            records: List[RunRecord] = []
            try:
                acc = ceiling_variant_accuracy(
                    variant, Xtr, ytr, Xte, yte, seed,
                    recorder=records.append, **kwargs)
                results[variant][str(seed)] = acc
            except Exception as e:
                results[variant][str(seed)] = None
                failed = True
                log.error("ceiling %s seed %d failed: %s", variant, seed, e)
            with open(os.path.join(out, f"{variant}_seed{seed}.csv"), "w") as fh:
                records_to_csv(records, fh)
    summary = {
        "kind": "ceiling", "version": __version__, "config": cfg,
        "seeds": seed_list,
        "accuracy": results,
        "mean_accuracy": {v: (float(np.mean([a for a in results[v].values()
                                             if a is not None]))
                              if any(a is not None for a in results[v].values())
                              else None) for v in variants},
        "failed": failed,
    }
    with open(os.path.join(out, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=1, default=float)
    return summary


def elm_scaling(Xtr: np.ndarray, ytr: np.ndarray, Xte: np.ndarray,
                yte: np.ndarray, elm_sizes: Sequence[int],
                ffnn_sizes: Sequence[int] = (), seed: int = 0,
                ridge_lambda: float = 1e-2, epochs: int = 15,
                batch_size: int = 64, alpha: float = 1e-3,
                out_path: Optional[str] = None) -> dict:
    """Test accuracy vs hidden-layer size for ridge-fit ELMs and (optionally)
    backprop-trained FFNNs, plus the linear ridge baseline.

    The ELM output layer is the closed-form ridge solution on frozen random
    sigmoid features (the classic ELM feature map: sigmoid(Wx + b) with W, b
    drawn once from the seeded RNG); the FFNN trains end to end with the same
    protocol as the ceiling analysis.
    """
    T = nn.one_hot(ytr, 10)
    result: Dict[str, object] = {"seed": seed, "elm": {}, "ffnn": {},
                                 "elm_sizes": [int(h) for h in elm_sizes],
                                 "ffnn_sizes": [int(h) for h in ffnn_sizes]}
    ridge_acc = ceiling_variant_accuracy("ridge", Xtr, ytr, Xte, yte, seed,
                                         ridge_lambda=ridge_lambda)
    result["ridge_baseline"] = ridge_acc
    for h in elm_sizes:
        rng = RngStream(seed, 70)
        W1 = rng.normal(0.0, 1.0 / np.sqrt(Xtr.shape[1]),
                        size=(Xtr.shape[1], h))
        b1 = rng.uniform(-1.0, 1.0, h)
        def feats(X):
            return 1.0 / (1.0 + np.exp(-(X @ W1 + b1)))
        Htr = np.hstack([feats(Xtr), np.ones((len(Xtr), 1))])
        Wo = nn.ridge_fit(Htr, T, lam=ridge_lambda)
        Hte = np.hstack([feats(Xte), np.ones((len(Xte), 1))])
        acc = float(((Hte @ Wo).argmax(axis=1) == yte).mean())
        result["elm"][str(int(h))] = acc
        log.info("elm h=%d acc=%.4f", h, acc)
    for h in ffnn_sizes:
        acc = ceiling_variant_accuracy("backprop", Xtr, ytr, Xte, yte, seed,
                                       hidden=int(h), epochs=epochs,
                                       batch_size=batch_size, alpha=alpha)
        result["ffnn"][str(int(h))] = acc
        log.info("ffnn h=%d acc=%.4f", h, acc)
    if out_path:
        with open(out_path, "w") as fh:
            json.dump(result, fh, indent=1)
    return result


# -- scaling scan -----------------------------------------------------------

@dataclass
class ScalingResult:
    optimizer: str
    dimensions: List[int]
    populations: List[int]
    update_seconds: List[float]   # median per-epoch update time per dimension
    evals_per_epoch: List[int]
    slope: float
    intercept: float
    r2: float


def scaling_scan(optimizer_name: str, dimensions: Sequence[int],
                 epochs_per_point: int = 10,
                 population_rule: Callable[[int], int] = default_population,
                 clock_for_dim: Optional[Callable[[int], Callable[[], float]]] = None,
                 seed: int = 0, dtype: Optional[str] = None,
                 timer_resolution: Optional[float] = None) -> ScalingResult:
    """Median per-epoch ask+tell time vs dimension on the trivial objective,
    with a log-log least-squares fit.

    Needs >= 5 dimensions spanning >= 1.5 decades (the fit contract).
    clock_for_dim injects a mock clock per dimension for tests.
    """
    dims = [int(d) for d in dimensions]
    if dims != sorted(dims):
        raise ValueError("dimensions must be sorted ascending")
    if len(dims) < 5 or math.log10(dims[-1] / dims[0]) < 1.5:
        raise ValueError("scaling fit needs >= 5 dimensions spanning "
                         ">= 1.5 decades")
    if timer_resolution is None:
        timer_resolution = (0.0 if clock_for_dim is not None
                            else time.get_clock_info("perf_counter").resolution)

    def measure(D: int, epochs: int) -> Tuple[float, int, int]:
        clock = clock_for_dim(D) if clock_for_dim is not None \
            else time.perf_counter
        p = population_rule(D)
        opt_cfg: Dict[str, object] = {}
        if optimizer_name not in ("spsa", "fd"):
            opt_cfg["population"] = p
        if dtype and optimizer_name in ("cma", "sep_cma"):
            opt_cfg["dtype"] = dtype
        obj = trivial_objective(D)
        opt = make_optimizer(optimizer_name, opt_cfg, dim=D,
                             rng=RngStream(seed, 0), init=np.zeros(D))
        times = []
        for epoch in range(epochs + 1):  # +1 warmup
            t0 = clock()
            cands = opt.ask()
            t1 = clock()
            scores = obj.evaluate_population(cands)
            t2 = clock()
            opt.tell(cands, scores)
            t3 = clock()
            if epoch > 0:
                times.append((t1 - t0) + (t3 - t2))
        return float(np.median(times)), p, opt.evals_per_epoch

    update_seconds, pops, epe = [], [], []
    for D in dims:
        epochs = epochs_per_point
        med, p, k = measure(D, epochs)
        attempts = 0
        while med < 10 * timer_resolution and attempts < 3:
            epochs *= 4
            med, p, k = measure(D, epochs)
            attempts += 1
        update_seconds.append(med)
        pops.append(p)
        epe.append(k)
    slope, intercept, r2 = fit_loglog(dims, update_seconds)
    return ScalingResult(optimizer_name, dims, pops, update_seconds, epe,
                         slope, intercept, r2)


def _run_scaling_experiment(cfg: dict, out_dir: Optional[str] = None) -> dict:
    exp = cfg["experiment"]
    obj_cfg = cfg.get("objective", {})
    out = out_dir or get_str(exp, "out", "runs/scaling")
    os.makedirs(out, exist_ok=True)
    names = get_list(obj_cfg, "optimizers", ["pepg", "spsa", "cma", "sep_cma"])
    dims = [int(d) for d in get_list(
        obj_cfg, "dimensions", [250, 500, 1000, 2000, 4000, 8000, 16000])]
    epochs = get_int(obj_cfg, "epochs_per_point", 10)
    dtype = get_str(obj_cfg, "dtype")
    results = {}
    failed = False
    for name in names:
        try:
            r = scaling_scan(name, dims, epochs_per_point=epochs, dtype=dtype)
            results[name] = asdict(r)
            # one CSV per optimizer in the core schema: epoch column reused
            # as the dimension index, update_time_s is the median epoch time
            recs = [RunRecord(epoch=i, evals=r.evals_per_epoch[i],
                              eval_time_s=0.0, update_time_s=r.update_seconds[i],
                              best_score=float(r.dimensions[i]))
                    for i in range(len(dims))]
            with open(os.path.join(out, f"scaling_{name}.csv"), "w") as fh:
                records_to_csv(recs, fh)
        except Exception as e:
            results[name] = {"error": str(e)}
            failed = True
            log.error("scaling scan for %s failed: %s", name, e)
    summary = {"kind": "scaling", "version": __version__, "config": cfg,
               "results": results, "failed": failed}
    with open(os.path.join(out, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=1, default=float)
    return summary


# -- population-size scan ---------------------------------------------------

def popscan(cfg: dict, out_dir: Optional[str] = None,
            seeds: Optional[Sequence[int]] = None,
            mnist_dir: Optional[str] = None) -> dict:
    return _run_popscan_experiment(cfg, out_dir=out_dir, seeds=seeds,
                                   mnist_dir=mnist_dir)


def _run_popscan_experiment(cfg: dict, out_dir: Optional[str] = None,
                            seeds: Optional[Sequence[int]] = None,
                            mnist_dir: Optional[str] = None) -> dict:
    """PEPG accuracy vs population ratio p = ceil(ratio * D)."""
    exp = cfg["experiment"]
    obj_cfg = dict(cfg.get("objective", {}))
    out = out_dir or get_str(exp, "out", "runs/popscan")
    os.makedirs(out, exist_ok=True)
    seed_list = list(seeds) if seeds is not None else \
        parse_seeds(exp.get("seeds", "0"))
    ratios = [float(r) for r in (get_list(obj_cfg, "ratios") or [])]
    obj_cfg.pop("ratios", None)
    if not ratios:
        raise ConfigError("popscan needs a ratios list in [objective]")
    if any(not 0 < r <= 1 for r in ratios):
        raise ConfigError("ratios must lie in (0, 1]")
    opt_cfg = dict(cfg.get("optimizer", {}))
    name = str(opt_cfg.pop("name", "pepg"))
    opt_cfg.pop("population", None)  # set per ratio
    budget = _budget_from_cfg(cfg.get("budget", {}))
    mnist_dir = mnist_dir or get_str(exp, "mnist_dir")
    accuracy_every = get_int(exp, "accuracy_every")

    # map ratios to integer populations; deduplicate ceiling collisions
    probe_obj, _ = _build_objective("popscan", obj_cfg, seed_list[0], mnist_dir)
    D = probe_obj.dim
    pops: Dict[int, float] = {}
    for r in ratios:
        p = math.ceil(r * D)
        if p < 2:
            raise ConfigError(f"ratio {r} gives population {p}; population "
                              f"methods need p >= 2")
        if p in pops:
            log.warning("ratio %s maps to population %d, same as ratio %s; "
                        "skipping duplicate", r, p, pops[p])
            continue
        pops[p] = r

    table = []
    failed = False
    for p, ratio in pops.items():
        for seed in seed_list:
            csv_name = f"p{p}_seed{seed}.csv"
            records: List[RunRecord] = []
            entry = {"ratio": ratio, "population": p, "seed": seed,
                     "csv": csv_name, "error": None, "final_test_accuracy": None}
            try:
                obj, init = _build_objective("popscan", obj_cfg, seed, mnist_dir)
                opt = make_optimizer(name, {**opt_cfg, "population": p},
                                     dim=obj.dim, rng=RngStream(seed, 0),
                                     init=init)
                records, best = run(opt, obj, budget,
                                    accuracy_every=accuracy_every)
                entry["final_test_accuracy"] = obj.test_accuracy(best)
                entry["best_score"] = min((r_.best_score for r_ in records),
                                          default=None)
            except Exception as e:
                entry["error"] = str(e)
                failed = True
                log.error("popscan p=%d seed %d failed: %s", p, seed, e)
            with open(os.path.join(out, csv_name), "w") as fh:
                records_to_csv(records, fh)
            table.append(entry)
    summary = {"kind": "popscan", "version": __version__, "config": cfg,
               "dim": D, "seeds": seed_list, "table": table, "failed": failed}
    with open(os.path.join(out, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=1, default=float)
    return summary
