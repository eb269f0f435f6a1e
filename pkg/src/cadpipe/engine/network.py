"""Sequential network: declarative spec, training loop, parameter I/O."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import DataError
from ..rng import Prng
from .layers import Conv1D, Dense, Dropout, Flatten, Layer
from .losses import LOSSES
from .optim import AdamParams, AdamState, adam_step


@dataclass(frozen=True)
class ConvSpec:
    filters: int
    kernel: int = 3
    stride: int = 1
    padding: str = "same"
    activation: str = "relu"
    l2: float = 0.0


@dataclass(frozen=True)
class DenseSpec:
    units: int
    activation: str = "linear"
    l2: float = 0.0


@dataclass(frozen=True)
class DropoutSpec:
    p: float


@dataclass(frozen=True)
class FlattenSpec:
    pass


LayerSpec = ConvSpec | DenseSpec | DropoutSpec | FlattenSpec


@dataclass(frozen=True)
class NetworkSpec:
    input_shape: tuple[int, ...]
    layers: tuple[LayerSpec, ...]
    loss: str = "binary_cross_entropy"
    optimizer: AdamParams = field(default_factory=AdamParams)
    epochs: int = 100
    batch_size: int = 256
    seed: int = 0

    def __post_init__(self):
        if self.loss not in LOSSES:
            raise DataError(f"unknown loss {self.loss!r}")
        if self.epochs < 1 or self.batch_size < 1:
            raise DataError("epochs and batch_size must be >= 1")
        if not self.input_shape or any(d < 1 for d in self.input_shape):
            raise DataError(f"input_shape must be positive, got {self.input_shape}")


def _make_layer(spec: LayerSpec) -> Layer:
    if isinstance(spec, ConvSpec):
        return Conv1D(spec.filters, spec.kernel, spec.stride, spec.padding,
                      spec.activation, spec.l2)
    if isinstance(spec, DenseSpec):
        return Dense(spec.units, spec.activation, spec.l2)
    if isinstance(spec, DropoutSpec):
        return Dropout(spec.p)
    if isinstance(spec, FlattenSpec):
        return Flatten()
    raise DataError(f"unknown layer spec {spec!r}")


class Network:
    """A built sequential network with Glorot-initialized parameters.

    One Prng (seeded from the spec unless an explicit stream is given) drives
    initialization and is then consumed by training for epoch shuffles and
    dropout masks, so the whole lifecycle is a single deterministic stream.

    After training, predict() is read-only and safe to call from multiple
    threads; train() mutates parameters and owns the instance while running.
    """

    def __init__(self, spec: NetworkSpec, rng: Prng | None = None):
        self.spec = spec
        self.rng = rng if rng is not None else Prng(spec.seed)
        self.layers: list[Layer] = []
        shape = tuple(spec.input_shape)
        for i, layer_spec in enumerate(spec.layers):
            layer = _make_layer(layer_spec)
            try:
                shape = layer.build(shape, self.rng)
            except DataError as exc:
                raise DataError(f"layer {i} ({type(layer).__name__}): {exc}") from None
            self.layers.append(layer)
        self.output_shape = shape
        self._loss_fn = LOSSES[spec.loss]

    # -- parameter plumbing ------------------------------------------------

    def parameters(self) -> list[np.ndarray]:
        return [arr for layer in self.layers for _, arr in layer.params()]

    def named_parameters(self) -> list[tuple[str, np.ndarray]]:
        return [
            (f"layer{i}.{name}", arr)
            for i, layer in enumerate(self.layers)
            for name, arr in layer.params()
        ]

    def gradients(self) -> list[np.ndarray]:
        return [arr for layer in self.layers for _, arr in layer.grads()]

    def n_parameters(self) -> int:
        return sum(arr.size for arr in self.parameters())

    def _zero_grads(self) -> None:
        for g in self.gradients():
            g[...] = 0.0

    # -- forward / backward ------------------------------------------------

    def forward(self, batch: np.ndarray, train: bool = False,
                rng: Prng | None = None) -> np.ndarray:
        batch = np.asarray(batch, dtype=np.float64)
        if batch.shape[1:] != tuple(self.spec.input_shape):
            raise DataError(
                f"batch shape {batch.shape[1:]} does not match input shape "
                f"{tuple(self.spec.input_shape)}"
            )
        out = batch
        for layer in self.layers:
            out = layer.forward(out, train, rng)
        return out

    def loss_and_grad(self, batch: np.ndarray, targets: np.ndarray,
                      rng: Prng | None = None) -> tuple[float, list[np.ndarray]]:
        """Forward in train mode, then reverse-mode gradients for every
        parameter; the returned loss includes the L2 penalties.

        The gradient arrays are the layers' live buffers, valid until the
        next loss_and_grad call; copy them to keep them longer.
        """
        self._zero_grads()
        out = self.forward(batch, train=True, rng=rng)
        data_loss, dout = self._loss_fn(out, np.asarray(targets, dtype=np.float64))
        penalty = sum(layer.l2_penalty() for layer in self.layers)
        loss = data_loss + penalty
        if not np.isfinite(loss):
            raise DataError(self._locate_non_finite())
        for layer in reversed(self.layers):
            dout = layer.backward(dout)
        for layer in self.layers:
            layer.add_l2_grads()
        return loss, self.gradients()

    def _locate_non_finite(self) -> str:
        for i, layer in enumerate(self.layers):
            out = getattr(layer, "_out", None)
            if out is not None and not np.isfinite(out).all():
                return f"non-finite values first appeared in layer {i} ({type(layer).__name__})"
        return "non-finite loss (inputs or targets are not finite)"

    # -- training ----------------------------------------------------------

    def train(self, inputs: np.ndarray, targets: np.ndarray) -> list[float]:
        """Mini-batch Adam training; returns the per-epoch loss history.

        Sample order is reshuffled every epoch from the network's stream; the
        last batch may be short. History entries are sample-weighted means of
        the batch losses.
        """
        inputs = np.asarray(inputs, dtype=np.float64)
        targets = np.asarray(targets, dtype=np.float64)
        n = inputs.shape[0]
        if n == 0:
            raise DataError("cannot train on an empty dataset")
        if targets.shape[0] != n:
            raise DataError("inputs and targets are not row-aligned")
        params = self.parameters()
        state = AdamState(params)
        history: list[float] = []
        batch_size = self.spec.batch_size
        for _ in range(self.spec.epochs):
            order = self.rng.permutation(n)
            epoch_loss = 0.0
            for start in range(0, n, batch_size):
                idx = order[start:start + batch_size]
                loss, grads = self.loss_and_grad(inputs[idx], targets[idx], rng=self.rng)
                adam_step(state, params, grads, self.spec.optimizer)
                epoch_loss += loss * idx.size
            history.append(epoch_loss / n)
        return history

    def predict(self, batch: np.ndarray) -> np.ndarray:
        """Eval-mode forward pass (dropout disabled)."""
        return self.forward(batch, train=False)


def init_network(spec: NetworkSpec, rng: Prng | None = None) -> Network:
    """Build a network with freshly initialized (untrained) parameters."""
    return Network(spec, rng=rng)


# -- parameter serialization ------------------------------------------------
#
# Format: one JSON header line {"tensors": [{"name": ..., "shape": [...]}],
# "dtype": "<f8"}, one newline, then the raw row-major little-endian float64
# bytes of every tensor concatenated in header order.

def save_params(net: Network, path: str | Path) -> None:
    named = net.named_parameters()
    header = {
        "tensors": [{"name": name, "shape": list(arr.shape)} for name, arr in named],
        "dtype": "<f8",
    }
    with open(path, "wb") as fh:
        fh.write(json.dumps(header).encode("utf-8"))
        fh.write(b"\n")
        for _, arr in named:
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_params(net: Network, path: str | Path) -> None:
    """Load parameters saved by save_params into a compatibly-shaped net."""
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode("utf-8"))
        named = net.named_parameters()
        if [t["name"] for t in header["tensors"]] != [name for name, _ in named]:
            raise DataError("parameter file does not match this network's layout")
        for meta, (name, arr) in zip(header["tensors"], named):
            if tuple(meta["shape"]) != arr.shape:
                raise DataError(
                    f"tensor {name}: file shape {meta['shape']} != network shape {arr.shape}"
                )
            raw = fh.read(arr.size * 8)
            if len(raw) != arr.size * 8:
                raise DataError(f"parameter file truncated at tensor {name}")
            arr[...] = np.frombuffer(raw, dtype="<f8").reshape(arr.shape)
