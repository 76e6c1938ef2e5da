"""Seeded random stream used by every stochastic step.

All draws come from one PCG64 bit generator through a buffer of uniform
doubles, so a chain is a pure function of its seed on every platform.
Replicate ``r`` of a run seeded with ``master`` uses
``SeedSequence(master).spawn(r + 1)[r]``.
"""
from __future__ import annotations

import bisect
import math

import numpy as np

_BLOCK = 4096


def spawn_seeds(master: int, count: int) -> list[np.random.SeedSequence]:
    return np.random.SeedSequence(master).spawn(count)


class Stream:
    """Uniform(0, 1) doubles from PCG64, handed out one at a time."""

    def __init__(self, seed):
        if not isinstance(seed, np.random.SeedSequence):
            seed = np.random.SeedSequence(int(seed))
        self.generator = np.random.Generator(np.random.PCG64(seed))
        self._buf: list[float] = []
        self._pos = 0

    def uniform(self) -> float:
        if self._pos >= len(self._buf):
            self._buf = self.generator.random(_BLOCK).tolist()
            self._pos = 0
        u = self._buf[self._pos]
        self._pos += 1
        return u

    def index(self, n: int) -> int:
        """Uniform integer in ``[0, n)``."""
        return min(int(self.uniform() * n), n - 1)

    def weighted(self, weights) -> int:
        total = sum(weights)
        x = self.uniform() * total
        acc = 0.0
        for i, w in enumerate(weights):
            acc += w
            if x < acc:
                return i
        # x == total up to rounding
        return max(i for i, w in enumerate(weights) if w > 0)

    def from_cdf(self, cdf) -> int:
        """Inverse-CDF draw from a precomputed cumulative table ending at 1."""
        return min(bisect.bisect_right(cdf, self.uniform()), len(cdf) - 1)

    def sample(self, n: int, k: int) -> list[int]:
        """``k`` distinct integers from ``range(n)``, uniformly (partial shuffle)."""
        pool = list(range(n))
        for i in range(k):
            j = i + self.index(n - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]

    def log_uniform(self) -> float:
        u = self.uniform()
        return math.log(u) if u > 0 else -math.inf
