"""Layer implementations: Conv1D, Dense, Dropout, Flatten.

Each layer owns its parameters and gradient buffers. forward() caches what
backward() needs; backward() consumes the cache, accumulates parameter
gradients and returns the gradient with respect to its input. Weights are
Glorot-uniform (receptive-field fans for convolutions), biases zero.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import DataError
from ..rng import Prng


def relu(z: np.ndarray) -> np.ndarray:
    return np.maximum(z, 0.0)


def sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _activate(name: str, z: np.ndarray) -> np.ndarray:
    if name == "relu":
        return relu(z)
    if name == "sigmoid":
        return sigmoid(z)
    if name == "linear":
        return z
    raise DataError(f"unknown activation {name!r}")


def _activation_grad(name: str, pre: np.ndarray, out: np.ndarray,
                     dout: np.ndarray) -> np.ndarray:
    if name == "relu":
        return dout * (pre > 0.0)
    if name == "sigmoid":
        return dout * out * (1.0 - out)
    if name == "linear":
        return dout
    raise DataError(f"unknown activation {name!r}")


class Layer:
    """Common layer surface; stateless layers keep params() empty."""

    def build(self, in_shape: tuple[int, ...], rng: Prng) -> tuple[int, ...]:
        raise NotImplementedError

    def forward(self, x: np.ndarray, train: bool, rng: Prng | None) -> np.ndarray:
        raise NotImplementedError

    def backward(self, dout: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def params(self) -> list[tuple[str, np.ndarray]]:
        return []

    def grads(self) -> list[tuple[str, np.ndarray]]:
        return []

    def l2_penalty(self) -> float:
        return 0.0

    def add_l2_grads(self) -> None:
        pass


class Dense(Layer):
    def __init__(self, units: int, activation: str = "linear", l2: float = 0.0):
        if units < 1:
            raise DataError("Dense units must be >= 1")
        if activation not in ("relu", "sigmoid", "linear"):
            raise DataError(f"Dense does not support activation {activation!r}")
        if l2 < 0:
            raise DataError("l2 must be >= 0")
        self.units = units
        self.activation = activation
        self.l2 = l2
        self.w = None
        self.b = None

    def build(self, in_shape, rng):
        if len(in_shape) != 1:
            raise DataError(
                f"Dense expects a flat input, got shape {in_shape} (missing Flatten?)"
            )
        fan_in = in_shape[0]
        bound = math.sqrt(6.0 / (fan_in + self.units))
        self.w = rng.uniform_signed(bound, size=(fan_in, self.units))
        self.b = np.zeros(self.units)
        self.grad_w = np.zeros_like(self.w)
        self.grad_b = np.zeros_like(self.b)
        return (self.units,)

    def forward(self, x, train, rng):
        self._x = x
        self._pre = x @ self.w + self.b
        self._out = _activate(self.activation, self._pre)
        return self._out

    def backward(self, dout):
        dpre = _activation_grad(self.activation, self._pre, self._out, dout)
        self.grad_w += self._x.T @ dpre
        self.grad_b += dpre.sum(axis=0)
        return dpre @ self.w.T

    def params(self):
        return [("w", self.w), ("b", self.b)]

    def grads(self):
        return [("w", self.grad_w), ("b", self.grad_b)]

    def l2_penalty(self):
        return self.l2 * float(np.sum(self.w * self.w))

    def add_l2_grads(self):
        if self.l2:
            self.grad_w += 2.0 * self.l2 * self.w


class Conv1D(Layer):
    """1-D convolution over (batch, length, channels) with `same` zero
    padding; output length is ceil(length / stride)."""

    def __init__(self, filters: int, kernel: int = 3, stride: int = 1,
                 padding: str = "same", activation: str = "relu", l2: float = 0.0):
        if filters < 1 or kernel < 1 or stride < 1:
            raise DataError("Conv1D filters/kernel/stride must be >= 1")
        if padding != "same":
            raise DataError(f"Conv1D supports only 'same' padding, got {padding!r}")
        if activation not in ("relu", "linear"):
            raise DataError(f"Conv1D does not support activation {activation!r}")
        if l2 < 0:
            raise DataError("l2 must be >= 0")
        self.filters = filters
        self.kernel = kernel
        self.stride = stride
        self.activation = activation
        self.l2 = l2
        self.w = None
        self.b = None

    def build(self, in_shape, rng):
        if len(in_shape) != 2:
            raise DataError(f"Conv1D expects (length, channels) input, got {in_shape}")
        length, channels = in_shape
        fan_in = channels * self.kernel
        fan_out = self.filters * self.kernel
        bound = math.sqrt(6.0 / (fan_in + fan_out))
        self.w = rng.uniform_signed(bound, size=(self.kernel, channels, self.filters))
        self.b = np.zeros(self.filters)
        self.grad_w = np.zeros_like(self.w)
        self.grad_b = np.zeros_like(self.b)
        self._in_len = length
        self._channels = channels
        self._out_len = -(-length // self.stride)  # ceil division
        pad = max((self._out_len - 1) * self.stride + self.kernel - length, 0)
        self._pad_left = pad // 2
        self._pad_total = pad
        return (self._out_len, self.filters)

    def forward(self, x, train, rng):
        batch, length, channels = x.shape
        if length != self._in_len or channels != self._channels:
            raise DataError(
                f"Conv1D built for input {(self._in_len, self._channels)}, "
                f"got {(length, channels)}"
            )
        padded = np.zeros((batch, length + self._pad_total, channels))
        padded[:, self._pad_left:self._pad_left + length] = x
        self._padded = padded
        if self.stride == 1:
            # One full-length GEMM per kernel tap, accumulated through
            # shifted views: cheaper than materializing an im2col buffer.
            flat = padded.reshape(batch * padded.shape[1], channels)
            pre = np.broadcast_to(self.b, (batch, self._out_len, self.filters)).copy()
            for k in range(self.kernel):
                z = (flat @ self.w[k]).reshape(batch, padded.shape[1], self.filters)
                pre += z[:, k:k + self._out_len]
        else:
            cols = self._im2col(padded, batch)
            self._cols = cols
            pre = cols @ self.w.reshape(self.kernel * channels, self.filters) + self.b
            pre = pre.reshape(batch, self._out_len, self.filters)
        self._pre = pre
        self._out = _activate(self.activation, pre)
        return self._out

    def backward(self, dout):
        batch = dout.shape[0]
        dpre = _activation_grad(self.activation, self._pre, self._out, dout)
        self.grad_b += dpre.sum(axis=(0, 1))
        channels = self._channels
        if self.stride == 1:
            dpre_flat = dpre.reshape(batch * self._out_len, self.filters)
            dpadded = np.zeros_like(self._padded)
            for k in range(self.kernel):
                tap = np.ascontiguousarray(self._padded[:, k:k + self._out_len])
                self.grad_w[k] += tap.reshape(batch * self._out_len, channels).T @ dpre_flat
                dtap = (dpre_flat @ self.w[k].T).reshape(batch, self._out_len, channels)
                dpadded[:, k:k + self._out_len] += dtap
        else:
            dpre_flat = dpre.reshape(batch * self._out_len, self.filters)
            w_flat = self.w.reshape(self.kernel * channels, self.filters)
            self.grad_w += (self._cols.T @ dpre_flat).reshape(self.w.shape)
            dcols = (dpre_flat @ w_flat.T).reshape(batch, self._out_len, self.kernel, channels)
            dpadded = np.zeros_like(self._padded)
            for k in range(self.kernel):
                np.add.at(
                    dpadded,
                    (slice(None), np.arange(self._out_len) * self.stride + k),
                    dcols[:, :, k],
                )
        return dpadded[:, self._pad_left:self._pad_left + self._in_len].copy()

    def _im2col(self, padded, batch):
        positions = np.arange(self._out_len) * self.stride
        cols = np.empty((batch, self._out_len, self.kernel, self._channels))
        for k in range(self.kernel):
            cols[:, :, k] = padded[:, positions + k]
        return cols.reshape(batch * self._out_len, self.kernel * self._channels)

    def params(self):
        return [("w", self.w), ("b", self.b)]

    def grads(self):
        return [("w", self.grad_w), ("b", self.grad_b)]

    def l2_penalty(self):
        return self.l2 * float(np.sum(self.w * self.w))

    def add_l2_grads(self):
        if self.l2:
            self.grad_w += 2.0 * self.l2 * self.w


class Dropout(Layer):
    """Inverted dropout: train mode zeroes units with probability p and
    scales survivors by 1/(1-p); eval mode is the identity."""

    def __init__(self, p: float):
        if not 0.0 <= p < 1.0:
            raise DataError(f"dropout probability must be in [0, 1), got {p}")
        self.p = p

    def build(self, in_shape, rng):
        return in_shape

    def forward(self, x, train, rng):
        if not train:
            self._mask = None
            return x
        if rng is None:
            raise DataError("Dropout in train mode needs a random stream")
        keep = rng.uniform(size=x.shape) >= self.p
        self._mask = keep / (1.0 - self.p)
        return x * self._mask

    def backward(self, dout):
        if self._mask is None:
            return dout
        return dout * self._mask


class Flatten(Layer):
    def build(self, in_shape, rng):
        size = 1
        for dim in in_shape:
            size *= dim
        self._in_shape = in_shape
        return (size,)

    def forward(self, x, train, rng):
        self._batch_shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, dout):
        return dout.reshape(self._batch_shape)
