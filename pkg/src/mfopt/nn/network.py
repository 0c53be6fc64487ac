"""Network assembly: specs, parameter packing, constraints, objective bridge."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..core import QuantizationSpec, RngStream, quantize_array
from ..objectives import Objective
from .layers import Conv2d, Dense, Flatten, LayerSpec, MaxPool

__all__ = ["NetworkSpec", "forward", "flatten_params", "unflatten_params",
           "as_objective", "elm_freeze", "save_params", "load_params",
           "ffnn", "table_convnet", "iris_ffnn"]

#: quantization at or above this many bits is treated as unconstrained, so a
#: "32-bit" network follows the identical float trajectory as constraint=none
QUANT_NOOP_BITS = 32


@dataclass(frozen=True)
class NetworkSpec:
    """Ordered layers + input shape + weight constraint + trainability mask.

    constraint: "none" | "positive_only" | "quantized"; quantized uses
    `bits` over [-1, 1] for weights and biases alike. trainable[i] marks
    layer i's parameters as exposed to training (ELM mode freezes all but
    the final dense layer).
    """

    layers: Tuple[LayerSpec, ...]
    input_shape: Tuple[int, ...]
    constraint: str = "none"
    bits: Optional[int] = None
    trainable: Optional[Tuple[bool, ...]] = None

    def __post_init__(self):
        if self.constraint not in ("none", "positive_only", "quantized"):
            raise ValueError(f"unknown constraint {self.constraint!r}")
        if self.constraint == "quantized" and (self.bits is None or self.bits < 1):
            raise ValueError("quantized constraint requires bits >= 1")
        # validate shape composition eagerly
        shape = self.input_shape
        for layer in self.layers:
            shape = layer.out_shape(shape)
        if self.trainable is not None and len(self.trainable) != len(self.layers):
            raise ValueError("trainable mask must have one entry per layer")

    @property
    def out_shape(self) -> Tuple[int, ...]:
        shape = self.input_shape
        for layer in self.layers:
            shape = layer.out_shape(shape)
        return shape

    def param_counts(self) -> List[int]:
        return [l.param_count() for l in self.layers]

    @property
    def n_params(self) -> int:
        return sum(self.param_counts())

    def layer_trainable(self, i: int) -> bool:
        return True if self.trainable is None else self.trainable[i]

    @property
    def n_trainable(self) -> int:
        return sum(c for i, c in enumerate(self.param_counts()) if self.layer_trainable(i))

    def init_params(self, rng: RngStream) -> np.ndarray:
        return np.concatenate([l.init(rng) for l in self.layers]) \
            if self.layers else np.empty(0)

    def slices(self) -> List[slice]:
        out, off = [], 0
        for c in self.param_counts():
            out.append(slice(off, off + c))
            off += c
        return out


def flatten_params(spec: NetworkSpec, tensors: Sequence[np.ndarray]) -> np.ndarray:
    """Concatenate per-layer parameter blocks into one ParamVector."""
    counts = spec.param_counts()
    flats = []
    for c, t in zip(counts, tensors):
        t = np.asarray(t, dtype=np.float64).ravel()
        if t.size != c:
            raise ValueError(f"layer block has {t.size} values, expected {c}")
        flats.append(t)
    return np.concatenate(flats) if flats else np.empty(0)


def unflatten_params(spec: NetworkSpec, params: np.ndarray) -> List[np.ndarray]:
    params = np.asarray(params, dtype=np.float64)
    if params.size != spec.n_params:
        raise ValueError(f"expected {spec.n_params} parameters, got {params.size}")
    return [params[s].copy() for s in spec.slices()]


def apply_constraint(spec: NetworkSpec, params: np.ndarray) -> np.ndarray:
    """Map stored parameters to the effective ones used by the forward pass."""
    if spec.constraint == "positive_only":
        return np.abs(params)
    if spec.constraint == "quantized" and spec.bits < QUANT_NOOP_BITS:
        return quantize_array(params, QuantizationSpec(spec.bits, -1.0, 1.0))
    return params


def constraint_grad_factor(spec: NetworkSpec, params: np.ndarray) -> Optional[np.ndarray]:
    """d(effective)/d(stored); None means identity (incl. straight-through)."""
    if spec.constraint == "positive_only":
        return np.sign(params)
    return None


def forward(spec: NetworkSpec, params: np.ndarray, x: np.ndarray,
            caches: Optional[list] = None) -> np.ndarray:
    """Deterministic forward pass on a batch. params length must match spec."""
    params = np.asarray(params, dtype=np.float64)
    if params.size != spec.n_params:
        raise ValueError(f"expected {spec.n_params} parameters, got {params.size}")
    eff = apply_constraint(spec, params)
    y = np.asarray(x, dtype=np.float64)
    if y.shape[1:] != spec.input_shape:
        raise ValueError(f"input shape {y.shape[1:]} != spec {spec.input_shape}")
    for layer, s in zip(spec.layers, spec.slices()):
        y, cache = layer.forward(y, eff[s])
        if caches is not None:
            caches.append(cache)
    return y


def backward(spec: NetworkSpec, params: np.ndarray, caches: list,
             dy: np.ndarray) -> np.ndarray:
    """Gradient w.r.t. stored params given forward caches and output grad."""
    grads = [None] * len(spec.layers)
    for i in range(len(spec.layers) - 1, -1, -1):
        dy, grads[i] = spec.layers[i].backward(dy, caches[i])
    g = np.concatenate(grads) if grads else np.empty(0)
    factor = constraint_grad_factor(spec, params)
    if factor is not None:
        g = g * factor
    return g


def forward_population(spec: NetworkSpec, wp: np.ndarray, x: np.ndarray,
                       chunk: int = 64, shared_cols=None,
                       dtype=np.float64) -> np.ndarray:
    """Forward a population of parameter vectors (p, n_params) on one shared
    batch; returns (p, B, *out). Candidates are processed in chunks to bound
    peak memory. shared_cols optionally caches the first conv layer's im2col
    of the shared batch. dtype=float32 roughly halves cost at black-box
    fitness-comparison precision."""
    dtype = np.dtype(dtype)
    wp = np.asarray(wp, dtype=np.float64)
    if wp.ndim != 2 or wp.shape[1] != spec.n_params:
        raise ValueError(f"expected (p, {spec.n_params}) parameters, got {wp.shape}")
    x = np.asarray(x, dtype=dtype)
    outs = []
    for lo in range(0, wp.shape[0], chunk):
        eff = wp[lo:lo + chunk]
        if spec.constraint != "none":
            eff = np.stack([apply_constraint(spec, w) for w in eff])
        eff = np.asarray(eff, dtype=dtype)
        y = x
        first = True
        for layer, s in zip(spec.layers, spec.slices()):
            w = eff[:, s]
            if isinstance(layer, Conv2d) and first and y.ndim == 4:
                y = layer.forward_population(y, w, shared_cols=shared_cols)
            else:
                y = layer.forward_population(y, w)
            first = False
        outs.append(y)
    return np.concatenate(outs, axis=0)


def elm_freeze(spec: NetworkSpec) -> NetworkSpec:
    """Freeze everything except the final dense layer (extreme learning machine)."""
    param_layers = [i for i, l in enumerate(spec.layers) if l.param_count() > 0]
    if len(param_layers) < 2:
        raise ValueError("ELM mode needs at least 2 parameterized layers")
    last_dense = max(i for i, l in enumerate(spec.layers) if isinstance(l, Dense))
    mask = tuple(i == last_dense for i in range(len(spec.layers)))
    return replace(spec, trainable=mask)


class NetworkObjective(Objective):
    """Black-box loss of a network over a dataset with seeded minibatches.

    The optimizer-visible dimension covers the trainable parameters only;
    frozen layers keep their stored values. All candidates within one epoch
    share the same minibatch (common random numbers), and the batch advances
    only between epochs so population fitness differences reflect parameters,
    not batch sampling. With full_vector=True the objective instead accepts
    full-length vectors whose frozen entries are ignored.
    """

    def __init__(self, spec: NetworkSpec, X: np.ndarray, y: np.ndarray,
                 loss: str = "cross_entropy", batch_size: Optional[int] = None,
                 rng: Optional[RngStream] = None,
                 base_params: Optional[np.ndarray] = None,
                 test_data: Optional[Tuple[np.ndarray, np.ndarray]] = None,
                 full_vector: bool = False, chunk: int = 64,
                 dtype=np.float64):
        self.spec = spec
        self.X = np.asarray(X, dtype=np.float64)
        self.y = np.asarray(y)
        if self.X.shape[1:] != spec.input_shape:
            raise ValueError(f"data shape {self.X.shape[1:]} != spec input {spec.input_shape}")
        if loss not in ("cross_entropy", "mse"):
            raise ValueError(f"unknown loss {loss!r}")
        self.loss = loss
        self.batch_size = batch_size
        self.rng = rng if rng is not None else RngStream(0, 1)
        self.base_params = (spec.init_params(self.rng.child(10 ** 6))
                            if base_params is None else
                            np.asarray(base_params, dtype=np.float64).copy())
        self.test_data = test_data
        self.full_vector = bool(full_vector)
        self.chunk = chunk
        self.dtype = np.dtype(dtype)
        self._trainable_idx = np.concatenate([
            np.arange(s.start, s.stop) for i, s in enumerate(spec.slices())
            if spec.layer_trainable(i)]) if spec.n_params else np.empty(0, dtype=np.intp)
        super().__init__(spec.n_params if self.full_vector else len(self._trainable_idx))
        self._epoch_key = None
        self._batch = None
        self._shared_cols = None
        self._out_dim = int(np.prod(spec.out_shape))
        self._n_seen = 0

    # -- batch scheduling ---------------------------------------------------
    def _current_batch(self):
        if self.batch_size is None or self.batch_size >= len(self.X):
            if self._batch is None:
                self._batch = (self.X, self.y)
            return self._batch
        key = self._n_seen
        if key != self._epoch_key:
            idx = self.rng.choice(len(self.X), size=self.batch_size, replace=False)
            self._batch = (self.X[idx], self.y[idx])
            self._epoch_key = key
            self._shared_cols = None
        return self._batch

    def advance_batch(self):
        """Move to the next seeded minibatch (called between epochs)."""
        self._n_seen += 1

    def embed(self, x: np.ndarray) -> np.ndarray:
        """Insert trainable values into the full parameter vector."""
        if self.full_vector:
            full = self.base_params.copy()
            full[self._trainable_idx] = np.asarray(x)[self._trainable_idx]
            return full
        full = self.base_params.copy()
        full[self._trainable_idx] = x
        return full

    def initial_trainable(self) -> np.ndarray:
        if self.full_vector:
            return self.base_params.copy()
        return self.base_params[self._trainable_idx].copy()

    def _loss_of_outputs(self, out: np.ndarray, yb: np.ndarray) -> np.ndarray:
        """out: (..., B, K); returns loss per leading index."""
        if self.loss == "mse":
            return np.mean((out - yb) ** 2, axis=(-2, -1))
        z = out - out.max(axis=-1, keepdims=True)
        logp = z - np.log(np.exp(z).sum(axis=-1, keepdims=True))
        picked = np.take_along_axis(
            logp, np.broadcast_to(yb, logp.shape[:-1])[..., None], axis=-1)
        return -picked.mean(axis=(-2, -1))

    def _evaluate(self, x):
        Xb, yb = self._current_batch()
        out = forward(self.spec, self.embed(x), Xb)
        return float(self._loss_of_outputs(out, yb))

    def evaluate_population(self, xs):
        xs = np.asarray(xs, dtype=np.float64)
        if xs.ndim != 2 or xs.shape[1] != self.dim:
            raise ValueError(f"expected (p, {self.dim}), got {xs.shape}")
        self.evals += xs.shape[0]
        Xb, yb = self._current_batch()
        full = np.repeat(self.base_params[None, :], xs.shape[0], axis=0)
        if self.full_vector:
            full[:, self._trainable_idx] = xs[:, self._trainable_idx]
        else:
            full[:, self._trainable_idx] = xs
        if self._shared_cols is None and Xb.ndim == 4 and \
                self.spec.layers and isinstance(self.spec.layers[0], Conv2d):
            from .layers import _im2col
            l0 = self.spec.layers[0]
            cols, hw = _im2col(np.asarray(Xb, dtype=self.dtype),
                               l0.kernel, l0.stride, l0.padding)
            self._shared_cols = (cols, hw)
        out = forward_population(self.spec, full, Xb, chunk=self.chunk,
                                 shared_cols=self._shared_cols,
                                 dtype=self.dtype)
        losses = self._loss_of_outputs(np.asarray(out, dtype=np.float64), yb)
        self.advance_batch()
        return np.asarray(losses, dtype=np.float64)

    def test_accuracy(self, x):
        if self.test_data is None:
            return None
        Xt, yt = self.test_data
        out = forward(self.spec, self.embed(np.asarray(x, dtype=np.float64)), Xt)
        return float((out.argmax(axis=-1) == yt).mean())


def as_objective(spec: NetworkSpec, X, y, loss: str = "cross_entropy",
                 batch_size: Optional[int] = None, rng: Optional[RngStream] = None,
                 base_params: Optional[np.ndarray] = None, test_data=None,
                 full_vector: bool = False, chunk: int = 64,
                 dtype=np.float64) -> NetworkObjective:
    return NetworkObjective(spec, X, y, loss=loss, batch_size=batch_size,
                            rng=rng, base_params=base_params,
                            test_data=test_data, full_vector=full_vector,
                            chunk=chunk, dtype=dtype)


# -- serialization ----------------------------------------------------------

def _spec_to_json(spec: NetworkSpec) -> dict:
    layers = []
    for l in spec.layers:
        if isinstance(l, Dense):
            layers.append({"type": "dense", "n_in": l.n_in, "n_out": l.n_out,
                           "activation": l.activation})
        elif isinstance(l, Conv2d):
            layers.append({"type": "conv2d", "in_ch": l.in_ch, "out_ch": l.out_ch,
                           "kernel": l.kernel, "stride": l.stride,
                           "padding": l.padding, "activation": l.activation})
        elif isinstance(l, MaxPool):
            layers.append({"type": "maxpool", "window": l.window, "stride": l._s()})
        elif isinstance(l, Flatten):
            layers.append({"type": "flatten"})
        else:
            raise TypeError(f"unserializable layer {l!r}")
    return {"layers": layers, "input_shape": list(spec.input_shape),
            "constraint": spec.constraint, "bits": spec.bits,
            "trainable": None if spec.trainable is None else list(spec.trainable)}


def spec_from_json(d: dict) -> NetworkSpec:
    layers = []
    for l in d["layers"]:
        t = l["type"]
        if t == "dense":
            layers.append(Dense(l["n_in"], l["n_out"], l.get("activation", "identity")))
        elif t == "conv2d":
            layers.append(Conv2d(l["in_ch"], l["out_ch"], l["kernel"],
                                 l.get("stride", 1), l.get("padding", 0),
                                 l.get("activation", "relu")))
        elif t == "maxpool":
            layers.append(MaxPool(l["window"], l.get("stride")))
        elif t == "flatten":
            layers.append(Flatten())
        else:
            raise ValueError(f"unknown layer type {t!r}")
    tr = d.get("trainable")
    return NetworkSpec(tuple(layers), tuple(d["input_shape"]),
                       constraint=d.get("constraint", "none"), bits=d.get("bits"),
                       trainable=None if tr is None else tuple(tr))


def save_params(path: str, spec: NetworkSpec, params: np.ndarray) -> None:
    """Flat little-endian float64 blob + JSON sidecar describing the spec."""
    params = np.asarray(params, dtype="<f8")
    if params.size != spec.n_params:
        raise ValueError("parameter count does not match spec")
    with open(path, "wb") as fh:
        fh.write(params.tobytes())
    with open(path + ".json", "w") as fh:
        json.dump(_spec_to_json(spec), fh, indent=1)


def load_params(path: str) -> Tuple[NetworkSpec, np.ndarray]:
    with open(path + ".json") as fh:
        spec = spec_from_json(json.load(fh))
    params = np.frombuffer(open(path, "rb").read(), dtype="<f8").copy()
    if params.size != spec.n_params:
        raise ValueError("blob length does not match spec parameter count")
    return spec, params


# -- canonical architectures ------------------------------------------------

def ffnn(hidden: int = 100, n_in: int = 784, n_out: int = 10,
         constraint: str = "none", bits: Optional[int] = None) -> NetworkSpec:
    """Single-hidden-layer ReLU network (hidden=100 is the ceiling-analysis size)."""
    return NetworkSpec((Dense(n_in, hidden, "relu"), Dense(hidden, n_out)),
                       (n_in,), constraint=constraint, bits=bits)


def table_convnet(constraint: str = "none", bits: Optional[int] = None) -> NetworkSpec:
    """28x28x1 -> conv(8,5,p2) -> pool2 -> conv(16,5,p2) -> pool2 -> fc10 (11,274 params)."""
    return NetworkSpec((
        Conv2d(1, 8, 5, 1, 2, "relu"), MaxPool(2, 2),
        Conv2d(8, 16, 5, 1, 2, "relu"), MaxPool(2, 2),
        Flatten(), Dense(784, 10),
    ), (1, 28, 28), constraint=constraint, bits=bits)


def iris_ffnn() -> NetworkSpec:
    """4 -> dense(10, relu) -> dense(3): 83 parameters."""
    return NetworkSpec((Dense(4, 10, "relu"), Dense(10, 3)), (4,))
