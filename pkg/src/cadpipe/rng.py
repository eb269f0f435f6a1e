"""Seeded random streams with a platform-independent algorithm.

Every random draw in the pipeline flows through a :class:`Prng` so that a run
is fully determined by its seeds. PCG64 produces the same stream for the same
seed on every platform, which is what makes run manifests reproducible.
"""

from __future__ import annotations

import numpy as np

ALGORITHM = "pcg64"


class Prng:
    """Thin wrapper over ``numpy.random.Generator`` with a fixed algorithm.

    The draw methods below are the complete stream protocol: consumers
    document the order of their draws in terms of these calls, which is what
    lets tests replay a stream and reconstruct e.g. synthetic sample
    coordinates bit for bit.
    """

    def __init__(self, seed: int):
        if seed < 0:
            raise ValueError(f"seed must be non-negative, got {seed}")
        self.seed = int(seed)
        self.algorithm = ALGORITHM
        self._gen = np.random.Generator(np.random.PCG64(self.seed))

    def derive(self, tag: int) -> "Prng":
        """Independent child stream; used for per-fold and per-tree seeds."""
        return Prng(self.seed ^ int(tag))

    def uniform(self, size=None) -> np.ndarray | float:
        """Uniform float64 draws in [0, 1)."""
        return self._gen.random(size)

    def uniform_signed(self, bound: float, size=None) -> np.ndarray | float:
        """Uniform float64 draws in [-bound, bound)."""
        return self._gen.uniform(-bound, bound, size)

    def integer(self, n: int) -> int:
        """One uniform integer in [0, n)."""
        return int(self._gen.integers(0, n))

    def integers(self, n: int, size: int) -> np.ndarray:
        """Uniform integers in [0, n), with replacement."""
        return self._gen.integers(0, n, size=size)

    def permutation(self, n: int) -> np.ndarray:
        """Shuffled arange(n)."""
        return self._gen.permutation(n)

    def subset(self, n: int, k: int) -> np.ndarray:
        """k distinct indices from range(n), in draw order."""
        return self._gen.permutation(n)[:k]
