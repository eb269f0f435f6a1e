"""Adam optimizer with bias correction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DataError


@dataclass(frozen=True)
class AdamParams:
    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-7

    def __post_init__(self):
        if not (0.0 <= self.beta1 < 1.0 and 0.0 <= self.beta2 < 1.0):
            raise DataError("Adam betas must lie in [0, 1)")
        if self.epsilon <= 0.0:
            raise DataError("Adam epsilon must be positive")
        if self.lr <= 0.0:
            raise DataError("Adam learning rate must be positive")


class AdamState:
    """First/second moment buffers matching a parameter list, plus the step
    counter used for bias correction."""

    def __init__(self, params: list[np.ndarray]):
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0


def adam_step(state: AdamState, params: list[np.ndarray], grads: list[np.ndarray],
              hyper: AdamParams) -> None:
    """One in-place Adam update: p -= lr * m_hat / (sqrt(v_hat) + epsilon)."""
    if len(params) != len(state.m) or len(grads) != len(params):
        raise DataError("parameter/gradient/state lists are misaligned")
    state.t += 1
    b1, b2 = hyper.beta1, hyper.beta2
    bias1 = 1.0 - b1 ** state.t
    bias2 = 1.0 - b2 ** state.t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        if p.shape != g.shape:
            raise DataError(f"gradient shape {g.shape} != parameter shape {p.shape}")
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * (g * g)
        p -= hyper.lr * (m / bias1) / (np.sqrt(v / bias2) + hyper.epsilon)
