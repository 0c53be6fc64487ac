"""Layer primitives with hand-written forward/backward passes (numpy only).

Tensor layout is NCHW for images. Each layer implementation works on a flat
slice of the network parameter vector; `param_count` fixes the slice length
and `init` draws the initial values.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

__all__ = ["Dense", "Conv2d", "MaxPool", "Flatten", "LayerSpec"]


def _relu(x):
    return np.maximum(x, 0.0)


@dataclass(frozen=True)
class LayerSpec:
    """Base marker; concrete layers subclass this dataclass."""

    def param_count(self) -> int:
        return 0

    def out_shape(self, in_shape: Tuple[int, ...]) -> Tuple[int, ...]:
        raise NotImplementedError

    def init(self, rng) -> np.ndarray:
        return np.empty(0)

    def forward(self, x, w):
        """Returns (y, cache)."""
        raise NotImplementedError

    def backward(self, dy, cache):
        """Returns (dx, dw)."""
        raise NotImplementedError


@dataclass(frozen=True)
class Dense(LayerSpec):
    n_in: int
    n_out: int
    activation: str = "identity"  # identity | relu

    def param_count(self):
        return self.n_in * self.n_out + self.n_out

    def out_shape(self, in_shape):
        if in_shape != (self.n_in,):
            raise ValueError(f"dense expects ({self.n_in},), got {in_shape}")
        return (self.n_out,)

    def init(self, rng):
        scale = np.sqrt(2.0 / self.n_in) if self.activation == "relu" \
            else np.sqrt(1.0 / self.n_in)
        W = rng.normal(0.0, scale, size=(self.n_in, self.n_out))
        b = np.zeros(self.n_out)
        return np.concatenate([W.ravel(), b])

    def _unpack(self, w):
        W = w[: self.n_in * self.n_out].reshape(self.n_in, self.n_out)
        b = w[self.n_in * self.n_out:]
        return W, b

    def forward(self, x, w):
        W, b = self._unpack(w)
        z = x @ W + b
        y = _relu(z) if self.activation == "relu" else z
        return y, (x, W, z)

    def backward(self, dy, cache):
        x, W, z = cache
        if self.activation == "relu":
            dy = dy * (z > 0)
        dW = x.T @ dy
        db = dy.sum(axis=0)
        dx = dy @ W.T
        return dx, np.concatenate([dW.ravel(), db])

    def forward_population(self, x, wp):
        """x: (B, n_in) shared batch; wp: (p, param_count) -> (p, B, n_out)."""
        p = wp.shape[0]
        W = wp[:, : self.n_in * self.n_out].reshape(p, self.n_in, self.n_out)
        b = wp[:, self.n_in * self.n_out:]
        if x.ndim == 2:
            z = np.einsum("bi,pio->pbo", x, W, optimize=True)
        else:  # (p, B, n_in): per-candidate activations from an earlier layer
            z = np.matmul(x, W)
        z += b[:, None, :]
        return _relu(z) if self.activation == "relu" else z


def _im2col(x: np.ndarray, k: int, stride: int, padding: int) -> Tuple[np.ndarray, Tuple[int, int]]:
    """x: (N, C, H, W) -> (N, Ho*Wo, C*k*k) patch matrix."""
    if padding:
        x = np.pad(x, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
    view = np.lib.stride_tricks.sliding_window_view(x, (k, k), axis=(2, 3))
    view = view[:, :, ::stride, ::stride]              # (N, C, Ho, Wo, k, k)
    N, C, Ho, Wo = view.shape[:4]
    cols = view.transpose(0, 2, 3, 1, 4, 5).reshape(N, Ho * Wo, C * k * k)
    return np.ascontiguousarray(cols), (Ho, Wo)


@dataclass(frozen=True)
class Conv2d(LayerSpec):
    in_ch: int
    out_ch: int
    kernel: int
    stride: int = 1
    padding: int = 0
    activation: str = "relu"

    def param_count(self):
        return self.out_ch * self.in_ch * self.kernel ** 2 + self.out_ch

    def out_shape(self, in_shape):
        c, h, w = in_shape
        if c != self.in_ch:
            raise ValueError(f"conv expects {self.in_ch} channels, got {c}")
        ho = (h + 2 * self.padding - self.kernel) // self.stride + 1
        wo = (w + 2 * self.padding - self.kernel) // self.stride + 1
        return (self.out_ch, ho, wo)

    def init(self, rng):
        fan_in = self.in_ch * self.kernel ** 2
        W = rng.normal(0.0, np.sqrt(2.0 / fan_in),
                       size=(fan_in, self.out_ch))
        b = np.zeros(self.out_ch)
        return np.concatenate([W.ravel(), b])

    def _unpack(self, w):
        fan_in = self.in_ch * self.kernel ** 2
        W = w[: fan_in * self.out_ch].reshape(fan_in, self.out_ch)
        b = w[fan_in * self.out_ch:]
        return W, b

    def forward(self, x, w):
        W, b = self._unpack(w)
        cols, (ho, wo) = _im2col(x, self.kernel, self.stride, self.padding)
        z = cols @ W + b                                  # (N, L, out_ch)
        y = _relu(z) if self.activation == "relu" else z
        y = y.transpose(0, 2, 1).reshape(x.shape[0], self.out_ch, ho, wo)
        return y, (x.shape, cols, W, z, (ho, wo))

    def backward(self, dy, cache):
        in_shape, cols, W, z, (ho, wo) = cache
        N = in_shape[0]
        dy = dy.reshape(N, self.out_ch, ho * wo).transpose(0, 2, 1)  # (N, L, out_ch)
        if self.activation == "relu":
            dy = dy * (z > 0)
        dW = np.einsum("nlf,nlo->fo", cols, dy, optimize=True)
        db = dy.sum(axis=(0, 1))
        dcols = dy @ W.T                                   # (N, L, C*k*k)
        dx = self._col2im(dcols, in_shape, ho, wo)
        return dx, np.concatenate([dW.ravel(), db])

    def _col2im(self, dcols, in_shape, ho, wo):
        N, C, H, Wd = in_shape
        k, s, pd = self.kernel, self.stride, self.padding
        dxp = np.zeros((N, C, H + 2 * pd, Wd + 2 * pd))
        dcols = dcols.reshape(N, ho, wo, C, k, k)
        for i in range(k):
            for j in range(k):
                dxp[:, :, i:i + s * ho:s, j:j + s * wo:s] += \
                    dcols[:, :, :, :, i, j].transpose(0, 3, 1, 2)
        return dxp[:, :, pd:pd + H, pd:pd + Wd] if pd else dxp

    def forward_population(self, x, wp, shared_cols: Optional[np.ndarray] = None):
        """Population forward.

        x is either a shared (B, C, H, W) batch (first conv layer) or a
        per-candidate (p, B, C, H, W) tensor. shared_cols caches the im2col of
        a shared batch across candidates and epochs.
        """
        p = wp.shape[0]
        fan_in = self.in_ch * self.kernel ** 2
        W = wp[:, : fan_in * self.out_ch].reshape(p, fan_in, self.out_ch)
        b = wp[:, fan_in * self.out_ch:]
        if x.ndim == 4:                                    # shared batch
            if shared_cols is None:
                cols, (ho, wo) = _im2col(x, self.kernel, self.stride, self.padding)
            else:
                cols, (ho, wo) = shared_cols
            B, L = cols.shape[0], cols.shape[1]
            flat = cols.reshape(B * L, fan_in)
            z = (flat @ W.transpose(1, 0, 2).reshape(fan_in, p * self.out_ch))
            z = z.reshape(B, L, p, self.out_ch).transpose(2, 0, 1, 3)
        else:                                              # (p, B, C, H, W)
            B = x.shape[1]
            cols, (ho, wo) = _im2col(x.reshape(p * B, *x.shape[2:]),
                                     self.kernel, self.stride, self.padding)
            L = cols.shape[1]
            z = np.matmul(cols.reshape(p, B * L, fan_in), W)
            z = z.reshape(p, B, L, self.out_ch)
        z += b[:, None, None, :]
        if self.activation == "relu":
            z = _relu(z)
        return z.transpose(0, 1, 3, 2).reshape(p, B, self.out_ch, ho, wo)


@dataclass(frozen=True)
class MaxPool(LayerSpec):
    window: int
    stride: Optional[int] = None

    def _s(self):
        return self.window if self.stride is None else self.stride

    def out_shape(self, in_shape):
        c, h, w = in_shape
        s = self._s()
        if self.window != s:
            raise ValueError("only non-overlapping pooling (stride == window) is supported")
        if h % s or w % s:
            raise ValueError("pooling window must tile the input")
        return (c, h // s, w // s)

    def forward(self, x, w):
        N, C, H, Wd = x.shape
        s = self._s()
        v = x.reshape(N, C, H // s, s, Wd // s, s)
        y = v.max(axis=(3, 5))
        mask = v == y[:, :, :, None, :, None]
        return y, (x.shape, mask)

    def backward(self, dy, cache):
        in_shape, mask = cache
        N, C, H, Wd = in_shape
        s = self._s()
        dys = dy[:, :, :, None, :, None] * mask
        # ties split the gradient between tied positions
        counts = mask.sum(axis=(3, 5), keepdims=True)
        dx = (dys / counts).reshape(N, C, H, Wd)
        return dx, np.empty(0)

    def forward_population(self, x, wp):
        p, B, C, H, Wd = x.shape
        s = self._s()
        return x.reshape(p, B, C, H // s, s, Wd // s, s).max(axis=(4, 6))


@dataclass(frozen=True)
class Flatten(LayerSpec):
    def out_shape(self, in_shape):
        return (int(np.prod(in_shape)),)

    def forward(self, x, w):
        return x.reshape(x.shape[0], -1), (x.shape,)

    def backward(self, dy, cache):
        (in_shape,) = cache
        return dy.reshape(in_shape), np.empty(0)

    def forward_population(self, x, wp):
        return x.reshape(x.shape[0], x.shape[1], -1)
