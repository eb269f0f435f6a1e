"""Minimal deterministic neural-network engine.

Dense float64 numpy arrays are the tensor currency (row-major, shape-tagged
by ndarray itself); layers, losses, reverse-mode gradients and Adam are
implemented here, with matrix products delegated to BLAS through numpy.
"""

from .layers import Conv1D, Dense, Dropout, Flatten
from .losses import binary_cross_entropy, mean_squared_error
from .network import (
    ConvSpec,
    DenseSpec,
    DropoutSpec,
    FlattenSpec,
    Network,
    NetworkSpec,
    init_network,
    load_params,
    save_params,
)
from .optim import AdamParams, AdamState, adam_step

__all__ = [
    "AdamParams",
    "AdamState",
    "Conv1D",
    "ConvSpec",
    "Dense",
    "DenseSpec",
    "Dropout",
    "DropoutSpec",
    "Flatten",
    "FlattenSpec",
    "Network",
    "NetworkSpec",
    "adam_step",
    "binary_cross_entropy",
    "init_network",
    "load_params",
    "mean_squared_error",
    "save_params",
]
