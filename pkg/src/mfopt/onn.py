"""Desk-scale surrogate of a fully tunable optical neural network.

Computational structure only — phase-encoded input weights, a fixed random
complex mixing matrix, a saturable pointwise nonlinearity, and a signed,
quantized, noisy intensity readout — exposed through the same black-box
Objective surface as every other problem in the package. It is not a device
model: no carrier dynamics, cavity geometry, or injection locking.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .core import QuantizationSpec, RngStream, quantize_array
from .objectives import Objective

__all__ = ["OnnConfig", "OnnParams", "mixing_matrix", "onn_forward",
           "OnnObjective", "onn_objective"]

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class OnnConfig:
    n_pixels: int
    n_in: int = 400
    n_modes: int = 2500
    n_out: int = 2500
    mixing_seed: int = 0
    nonlinearity: str = "saturable"  # saturable | off
    input_bits: int = 10
    weight_bits: int = 8
    noise_sigma: float = 0.0
    score_bits: int = 8
    quantize_scores: bool = True

    def __post_init__(self):
        for name in ("n_pixels", "n_in", "n_modes", "n_out"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        for name in ("input_bits", "weight_bits", "score_bits"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        if self.nonlinearity not in ("saturable", "off"):
            raise ValueError(f"nonlinearity must be 'saturable' or 'off', "
                             f"got {self.nonlinearity!r}")

    @property
    def dim(self) -> int:
        return self.n_in + self.n_out


@dataclass(frozen=True)
class OnnParams:
    """phi_in in [0, 2pi)^{n_in}, w_out in [-1, 1]^{n_out}."""

    phi_in: np.ndarray
    w_out: np.ndarray

    @staticmethod
    def from_vector(cfg: OnnConfig, x: np.ndarray) -> "OnnParams":
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (cfg.dim,):
            raise ValueError(f"expected parameter vector of length {cfg.dim}, "
                             f"got shape {x.shape}")
        return OnnParams(np.mod(x[: cfg.n_in], TWO_PI),
                         np.clip(x[cfg.n_in:], -1.0, 1.0))

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.phi_in, self.w_out])


def mixing_matrix(cfg: OnnConfig) -> np.ndarray:
    """Fixed complex Gaussian mixing, entries ~ CN(0, 1/n_in)."""
    rng = RngStream(cfg.mixing_seed, 0)
    scale = np.sqrt(0.5 / cfg.n_in)  # per real component of CN(0, 1/n_in)
    re = rng.normal(0.0, scale, size=(cfg.n_modes, cfg.n_in))
    im = rng.normal(0.0, scale, size=(cfg.n_modes, cfg.n_in))
    return re + 1j * im


def _bin_resample(v: np.ndarray, m: int) -> np.ndarray:
    """Average the last axis into m contiguous bins (handles non-divisible)."""
    n = v.shape[-1]
    if n == m:
        return v
    edges = (np.arange(m + 1) * n) // m
    out = np.empty(v.shape[:-1] + (m,), dtype=v.dtype)
    for j in range(m):
        out[..., j] = v[..., edges[j]:edges[j + 1]].mean(axis=-1)
    return out


def _quantize_phase(phi: np.ndarray, bits: int) -> np.ndarray:
    """Snap wrapped phases to the 2^bits-level grid over [0, 2pi)."""
    if bits >= 53:  # beyond double precision: no-op
        return np.mod(phi, TWO_PI)
    step = TWO_PI / (1 << bits)
    return np.mod(np.floor(np.mod(phi, TWO_PI) / step + 0.5) * step, TWO_PI)


class _Device:
    """Shared forward machinery for single-candidate and population paths."""

    def __init__(self, cfg: OnnConfig):
        self.cfg = cfg
        self.M = mixing_matrix(cfg)
        self._wq = QuantizationSpec(cfg.weight_bits, -1.0, 1.0)

    def intensities(self, images: np.ndarray, phi: np.ndarray) -> np.ndarray:
        """images: (B, n_pixels); phi: (..., n_in) -> (..., B, n_out)."""
        cfg = self.cfg
        blocks = _bin_resample(np.asarray(images, dtype=np.float64), cfg.n_in)
        phase = np.exp(1j * _quantize_phase(phi, cfg.input_bits))
        u = blocks[..., None, :, :] * phase[..., None, :] \
            if phi.ndim > 1 else blocks * phase
        E = u @ self.M.T
        if cfg.nonlinearity == "saturable":
            E = E / (1.0 + np.abs(E) ** 2)
        I = np.abs(E) ** 2
        return _bin_resample(I, cfg.n_out)

    def readout(self, I: np.ndarray, w_out: np.ndarray) -> np.ndarray:
        """I: (..., B, n_out); w_out: (..., n_out) -> raw scores (..., B)."""
        w_out = np.clip(w_out, -1.0, 1.0)
        wq = quantize_array(w_out, self._wq)
        # the signed grid has no zero level; an exactly-zero weight means a
        # disconnected readout channel, which contributes nothing
        wq = np.where(w_out == 0.0, 0.0, wq)
        return np.einsum("...bo,...o->...b", I, wq)


def onn_forward(cfg: OnnConfig, params, image: np.ndarray,
                noise_rng: Optional[RngStream] = None,
                score_range: Optional[float] = None,
                device: Optional[_Device] = None) -> float:
    """Run one Boolean image through the surrogate; returns the scalar score.

    params may be an OnnParams or a flat vector of length cfg.dim. Noise is
    drawn from noise_rng (omit for the noiseless output). Score quantization
    needs a calibrated range; with score_range=None it is skipped.
    """
    image = np.asarray(image, dtype=np.float64).ravel()
    if image.size != cfg.n_pixels:
        raise ValueError(f"expected image of {cfg.n_pixels} pixels, "
                         f"got {image.size}")
    if not isinstance(params, OnnParams):
        params = OnnParams.from_vector(cfg, params)
    dev = device if device is not None else _Device(cfg)
    I = dev.intensities(image[None, :], params.phi_in)
    out = dev.readout(I, params.w_out)[0]
    if noise_rng is not None and cfg.noise_sigma > 0:
        out += cfg.noise_sigma * noise_rng.normal()
    if cfg.quantize_scores and score_range is not None:
        out = float(quantize_array(
            np.array([out]), QuantizationSpec(cfg.score_bits, -score_range,
                                              score_range))[0])
    return float(out)


class OnnObjective(Objective):
    """MSE of surrogate scores against {-1, +1} targets on seeded batches.

    All candidates in one evaluate_population call see the same minibatch
    (common random numbers); the batch advances between calls. The readout
    score range is calibrated once at construction: the 99th percentile of
    |score| over a seeded batch of random parameter draws, frozen thereafter.
    """

    CALIB_CANDIDATES = 8
    CALIB_IMAGES = 128

    def __init__(self, cfg: OnnConfig, X: np.ndarray, y: np.ndarray,
                 batch_size: Optional[int] = None,
                 rng: Optional[RngStream] = None,
                 test_data: Optional[Tuple[np.ndarray, np.ndarray]] = None):
        self.cfg = cfg
        X = np.asarray(X, dtype=np.float64).reshape(len(X), -1)
        if X.shape[1] != cfg.n_pixels:
            raise ValueError(f"task images have {X.shape[1]} pixels, "
                             f"config says {cfg.n_pixels}")
        y = np.asarray(y, dtype=np.float64)
        vals = set(np.unique(y))
        if vals <= {0.0, 1.0}:
            y = 2.0 * y - 1.0  # map {0,1} to {-1,+1}
        elif not vals <= {-1.0, 1.0}:
            raise ValueError("targets must be in {-1,+1} or {0,1}")
        self.X, self.y = X, y
        self.batch_size = batch_size
        self.rng = rng if rng is not None else RngStream(0, 2)
        self.noise_rng = self.rng.child(1)
        self.test_data = None
        if test_data is not None:
            Xt = np.asarray(test_data[0], dtype=np.float64).reshape(len(test_data[0]), -1)
            yt = np.asarray(test_data[1], dtype=np.float64)
            yt = 2.0 * yt - 1.0 if set(np.unique(yt)) <= {0.0, 1.0} else yt
            self.test_data = (Xt, yt)
        self.device = _Device(cfg)
        super().__init__(cfg.dim)
        self.init_box = (0.0, 1.0)
        self._batch = None
        self.score_range = self._calibrate()

    def _calibrate(self) -> float:
        crng = self.rng.child(2)
        n = min(self.CALIB_IMAGES, len(self.X))
        imgs = self.X[crng.choice(len(self.X), size=n, replace=False)]
        scores = []
        for _ in range(self.CALIB_CANDIDATES):
            phi = crng.uniform(0.0, TWO_PI, size=self.cfg.n_in)
            w = crng.uniform(-1.0, 1.0, size=self.cfg.n_out)
            I = self.device.intensities(imgs, phi)
            scores.append(self.device.readout(I, w))
        r = float(np.percentile(np.abs(np.concatenate(scores)), 99))
        return r if r > 0 else 1.0

    def _current_batch(self):
        if self.batch_size is None or self.batch_size >= len(self.X):
            return self.X, self.y
        if self._batch is None:
            idx = self.rng.choice(len(self.X), size=self.batch_size, replace=False)
            self._batch = (self.X[idx], self.y[idx])
        return self._batch

    def advance_batch(self):
        self._batch = None

    def _scores(self, phi: np.ndarray, w: np.ndarray, Xb: np.ndarray,
                noisy: bool = True) -> np.ndarray:
        cfg = self.cfg
        I = self.device.intensities(Xb, phi)
        out = self.device.readout(I, w)
        if noisy and cfg.noise_sigma > 0:
            out = out + cfg.noise_sigma * self.noise_rng.normal(size=out.shape)
        if cfg.quantize_scores:
            out = quantize_array(out, QuantizationSpec(
                cfg.score_bits, -self.score_range, self.score_range))
        return out

    def _evaluate(self, x):
        p = OnnParams.from_vector(self.cfg, x)
        Xb, yb = self._current_batch()
        out = self._scores(p.phi_in, p.w_out, Xb)
        return float(np.mean((out - yb) ** 2))

    def evaluate_population(self, xs):
        xs = np.asarray(xs, dtype=np.float64)
        if xs.ndim != 2 or xs.shape[1] != self.dim:
            raise ValueError(f"expected (p, {self.dim}), got {xs.shape}")
        self.evals += xs.shape[0]
        Xb, yb = self._current_batch()
        phi = np.mod(xs[:, : self.cfg.n_in], TWO_PI)
        w = np.clip(xs[:, self.cfg.n_in:], -1.0, 1.0)
        out = self._scores(phi, w, Xb)
        losses = np.mean((out - yb) ** 2, axis=-1)
        self.advance_batch()
        return np.asarray(losses, dtype=np.float64)

    def test_accuracy(self, x):
        data = self.test_data if self.test_data is not None else (self.X, self.y)
        p = OnnParams.from_vector(self.cfg, np.asarray(x, dtype=np.float64))
        out = self._scores(p.phi_in, p.w_out, data[0], noisy=False)
        # threshold at the midpoint between the class targets
        return float(((out >= 0.0) == (data[1] > 0)).mean())


def onn_objective(cfg: OnnConfig, X, y, batch_size: Optional[int] = None,
                  rng: Optional[RngStream] = None, test_data=None) -> OnnObjective:
    return OnnObjective(cfg, X, y, batch_size=batch_size, rng=rng,
                        test_data=test_data)
