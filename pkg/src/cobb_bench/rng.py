"""Portable 64-bit random stream used everywhere a seed appears.

The generator is SplitMix64.  With ``state`` a 64-bit unsigned integer and all
arithmetic taken modulo 2**64, one step is::

    state = state + 0x9E3779B97F4A7C15
    z = state
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    out = z ^ (z >> 31)

Derived quantities:

* ``random()``: ``(out >> 11) * 2**-53``, a double in [0, 1).
* ``randbelow(m)``: ``((out >> 11) * m) >> 53``, an integer in [0, m).
* ``normal()``: Box-Muller on two consecutive uniforms ``u1, u2``:
  ``sqrt(-2 ln(1 - u1)) * cos(2 pi u2)`` then ``... * sin(2 pi u2)``.
* ``permutation(n)``: Fisher-Yates, ``for i = n-1 .. 1: swap(i, randbelow(i+1))``.

Because the state advances by a constant, the i-th output only depends on
``seed + i * gamma``; this is what makes the vectorised draws below cheap.
"""

from __future__ import annotations

import hashlib

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def member_seed(seed: int, index: int) -> int:
    """Seed of ensemble member ``index``: ``seed XOR (index + 1) * gamma`` (wrapping)."""
    return (seed ^ ((index + 1) * GOLDEN_GAMMA)) & MASK64


def derive_seed(seed: int, *labels: object) -> int:
    """Seed for a labelled sub-task, e.g. ``derive_seed(42, "knn", 3)`` for fold 3.

    The labels are joined with ``:`` after the decimal seed and hashed with
    BLAKE2b (8-byte digest, little-endian).
    """
    key = ":".join([str(seed & MASK64), *(str(x) for x in labels)])
    return int.from_bytes(hashlib.blake2b(key.encode(), digest_size=8).digest(), "little")


class SplitMix64:
    def __init__(self, seed: int):
        self.state = int(seed) & MASK64

    def next_u64(self, n: int) -> np.ndarray:
        if n <= 0:
            return np.zeros(0, dtype=np.uint64)
        steps = np.arange(1, n + 1, dtype=np.uint64) * np.uint64(GOLDEN_GAMMA)
        out = _mix(np.uint64(self.state) + steps)
        self.state = (self.state + n * GOLDEN_GAMMA) & MASK64
        return out

    def random(self, n: int | None = None):
        u = (self.next_u64(1 if n is None else n) >> np.uint64(11)).astype(np.float64)
        u *= 2.0**-53
        return float(u[0]) if n is None else u

    def uniform(self, low: float, high: float, n: int) -> np.ndarray:
        return low + (high - low) * self.random(n)

    def randbelow(self, m: int) -> int:
        if m <= 0:
            raise ValueError("randbelow bound must be positive")
        top = int(self.next_u64(1)[0]) >> 11
        return (top * m) >> 53

    def normal(self, n: int) -> np.ndarray:
        pairs = (n + 1) // 2
        u = self.random(2 * pairs)
        radius = np.sqrt(-2.0 * np.log1p(-u[0::2]))
        angle = 2.0 * np.pi * u[1::2]
        z = np.empty(2 * pairs)
        z[0::2] = radius * np.cos(angle)
        z[1::2] = radius * np.sin(angle)
        return z[:n]

    def randbelow_many(self, bounds) -> list[int]:
        """``[randbelow(m) for m in bounds]`` drawn in one batch."""
        bounds = [int(m) for m in bounds]
        if any(m <= 0 for m in bounds):
            raise ValueError("randbelow bound must be positive")
        tops = (self.next_u64(len(bounds)) >> np.uint64(11)).tolist()
        return [(t * m) >> 53 for t, m in zip(tops, bounds)]

    def permutation(self, n: int) -> np.ndarray:
        perm = list(range(n))
        for i, j in zip(range(n - 1, 0, -1), self.randbelow_many(range(n, 1, -1))):
            perm[i], perm[j] = perm[j], perm[i]
        return np.array(perm, dtype=np.int64)

    def sample_without_replacement(self, n: int, k: int) -> np.ndarray:
        """First ``k`` slots of a partial Fisher-Yates shuffle, sorted ascending."""
        pool = list(range(n))
        for i, r in enumerate(self.randbelow_many(range(n, n - k, -1))):
            j = i + r
            pool[i], pool[j] = pool[j], pool[i]
        return np.sort(np.array(pool[:k], dtype=np.int64))

    def bootstrap(self, n: int) -> np.ndarray:
        """``n`` indices drawn uniformly with replacement."""
        top = (self.next_u64(n) >> np.uint64(11)).astype(object)
        return np.array([(int(t) * n) >> 53 for t in top], dtype=np.intp)

    def weighted_indices(self, weights: np.ndarray, n: int) -> np.ndarray:
        """``n`` indices drawn with replacement, ``P(i) = weights[i] / sum(weights)``."""
        cdf = np.cumsum(weights)
        u = self.random(n) * cdf[-1]
        idx = np.searchsorted(cdf, u, side="right")
        return np.minimum(idx, len(weights) - 1)
