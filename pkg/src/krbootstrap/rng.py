"""Counter-based 64-bit random streams.

Every random decision in the package flows from SplitMix64.  The finalizer
is the standard one:

    z = x + 0x9E3779B97F4A7C15          (mod 2**64)
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    z = z ^ (z >> 31)

A stream seeded with ``key`` yields ``finalize(key + i * GAMMA)`` for
``i = 1, 2, ...``, so the i-th output can be computed directly (this is what
the vectorised per-pair weights use).  Per-trial seeds are derived with
``mix(master, a, b, ...)``, which folds each word into the state through one
finalizer round.
"""
from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_INV53 = 2.0 ** -53


def finalize(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def splitmix64(x: int) -> int:
    """One SplitMix64 step: advance by GAMMA then finalize."""
    return finalize(x + GAMMA)


def mix(master: int, *words: int) -> int:
    """Derive an independent 64-bit seed from a master seed and indices."""
    h = splitmix64(master & MASK64)
    for w in words:
        h = splitmix64(h ^ (w & MASK64))
    return h


def to_unit(x: int) -> float:
    """Top 53 bits of a 64-bit word as a float in [0, 1)."""
    return (x >> 11) * _INV53


class SplitMix64:
    """Sequential SplitMix64 stream."""

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GAMMA) & MASK64
        return finalize(self.state)

    def random(self) -> float:
        return to_unit(self.next_u64())

    def randbelow(self, k: int) -> int:
        """Uniform integer in [0, k) by rejection (no modulo bias)."""
        if k <= 0:
            raise ValueError("k must be positive")
        limit = (1 << 64) - ((1 << 64) % k)
        while True:
            x = self.next_u64()
            if x < limit:
                return x % k

    def sample(self, population, k: int) -> list:
        """k distinct items, partial Fisher-Yates."""
        pool = list(population)
        if k > len(pool):
            raise ValueError("sample larger than population")
        for i in range(k):
            j = i + self.randbelow(len(pool) - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]

    def choice(self, seq):
        return seq[self.randbelow(len(seq))]


def stream_uniforms(seed: int, count: int) -> np.ndarray:
    """The first ``count`` outputs of ``SplitMix64(seed)`` as floats in [0,1).

    Vectorised; element i equals the (i+1)-th call of ``SplitMix64(seed).random()``.
    """
    idx = np.arange(1, count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(seed & MASK64) + idx * np.uint64(GAMMA)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
        z = z ^ (z >> np.uint64(31))
    return (z >> np.uint64(11)).astype(np.float64) * _INV53
