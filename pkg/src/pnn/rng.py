"""Reproducible random source.

The generator is xoshiro256** (Blackman & Vigna) with its 256-bit state filled
from the 64-bit seed by four SplitMix64 steps.  Gaussian draws use the basic
Box-Muller transform on two 53-bit uniforms; both outputs of a pair are used,
cosine branch first.  Integers below ``n`` come from rejection sampling on the
raw 64-bit output, so shuffles are unbiased.  Everything is plain integer
arithmetic, which keeps draw sequences identical across platforms and numpy
versions.

Independent streams are derived as ``Rng(seed ^ stream_id)``.
"""

from __future__ import annotations

import math
from typing import MutableSequence, Sequence, TypeVar

import numpy as np

T = TypeVar("T")

MASK64 = (1 << 64) - 1
_TWO_PI = 2.0 * math.pi
_INV_2_53 = 1.0 / (1 << 53)


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


def _splitmix64(state: int) -> tuple[int, int]:
    state = (state + 0x9E3779B97F4A7C15) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return state, z ^ (z >> 31)


class Rng:
    """Single-owner xoshiro256** generator."""

    def __init__(self, seed: int):
        if not 0 <= seed <= MASK64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = seed
        sm = seed
        state = []
        for _ in range(4):
            sm, out = _splitmix64(sm)
            state.append(out)
        self._s = state
        self._spare: float | None = None

    def child(self, stream_id: int) -> "Rng":
        return Rng((self.seed ^ stream_id) & MASK64)

    def next_u64(self) -> int:
        s = self._s
        result = (_rotl((s[1] * 5) & MASK64, 7) * 9) & MASK64
        t = (s[1] << 17) & MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def uniform(self) -> float:
        """Uniform draw on [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * _INV_2_53

    def randbelow(self, n: int) -> int:
        if n <= 0:
            raise ValueError(f"randbelow needs n >= 1, got {n}")
        limit = (MASK64 + 1) - ((MASK64 + 1) % n)
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n

    def _standard_normal(self) -> float:
        if self._spare is not None:
            z, self._spare = self._spare, None
            return z
        u1 = 1.0 - self.uniform()  # (0, 1], keeps log finite
        u2 = self.uniform()
        r = math.sqrt(-2.0 * math.log(u1))
        theta = _TWO_PI * u2
        self._spare = r * math.sin(theta)
        return r * math.cos(theta)

    def gaussian(self, mean: float = 0.0, stddev: float = 1.0) -> float:
        if stddev < 0:
            raise ValueError(f"stddev must be >= 0, got {stddev}")
        z = self._standard_normal()
        if stddev == 0:
            return mean
        return mean + stddev * z

    def gaussian_array(self, shape, mean: float = 0.0, stddev: float = 1.0) -> np.ndarray:
        """Fill an array of ``shape`` in row-major order with Gaussian draws."""
        if stddev < 0:
            raise ValueError(f"stddev must be >= 0, got {stddev}")
        n = int(np.prod(shape))
        draws = np.array([self._standard_normal() for _ in range(n)], dtype=np.float64)
        if stddev == 0:
            return np.full(shape, mean, dtype=np.float64)
        return (mean + stddev * draws).reshape(shape)

    def shuffle_inplace(self, items: MutableSequence) -> None:
        # Fisher-Yates, walking down from the last slot.
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]

    def shuffle(self, items: Sequence[T]) -> list[T]:
        out = list(items)
        self.shuffle_inplace(out)
        return out

    def permutation(self, n: int) -> np.ndarray:
        perm = list(range(n))
        self.shuffle_inplace(perm)
        return np.array(perm, dtype=np.intp)


def gaussian(rng: Rng, mean: float, stddev: float) -> float:
    return rng.gaussian(mean, stddev)


def shuffle(rng: Rng, items: Sequence[T]) -> list[T]:
    return rng.shuffle(items)
