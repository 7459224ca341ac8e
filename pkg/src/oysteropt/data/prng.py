"""SplitMix64 in counter mode.

Output ``k`` (0-based) of a stream with seed ``s`` is the SplitMix64 mix
function applied to ``s + (k + 1) * 0x9E3779B97F4A7C15 (mod 2**64)``::

    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    z =  z ^ (z >> 31)

Uniform doubles are ``(z >> 11) * 2**-53`` in [0, 1). Normal variates use
Box-Muller on consecutive pairs ``(u1, u2)`` with ``1 - u1`` in (0, 1]:
``sqrt(-2 ln(1 - u1)) * cos(2 pi u2)``; the sine branch is discarded.
Because output ``k`` depends only on ``(s, k)``, results are bit-exact on any
platform with IEEE doubles and a correctly rounded ``log``/``cos``.
"""

from __future__ import annotations

import numpy as np

__all__ = ["GOLDEN", "mix64", "derive_seed", "SplitMix64"]

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK = (1 << 64) - 1


def mix64(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.uint64)
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def derive_seed(seed: int, *keys: int) -> int:
    """Fold integer keys into a child seed: ``seed <- mix64(seed ^ key + golden)``."""
    s = int(seed) & _MASK
    for key in keys:
        z = ((s ^ (int(key) & _MASK)) + 0x9E3779B97F4A7C15) & _MASK
        s = int(mix64(np.array([z], dtype=np.uint64))[0])
    return s


class SplitMix64:
    """Sequential reader over a counter-mode SplitMix64 stream."""

    def __init__(self, seed: int):
        if int(seed) != seed or seed < 0 or seed >= 2**64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
        self.seed = int(seed)
        self.counter = 0

    def next_u64(self, n: int) -> np.ndarray:
        k = np.arange(self.counter + 1, self.counter + n + 1, dtype=np.uint64)
        self.counter += n
        with np.errstate(over="ignore"):
            return mix64(np.uint64(self.seed) + k * GOLDEN)

    def uniform(self, n: int = 1, low: float = 0.0, high: float = 1.0) -> np.ndarray:
        u = (self.next_u64(n) >> np.uint64(11)).astype(np.float64) * 2.0 ** -53
        return low + (high - low) * u

    def normal(self, n: int = 1, sigma: float = 1.0) -> np.ndarray:
        u = self.uniform(2 * n).reshape(n, 2)
        return sigma * np.sqrt(-2.0 * np.log(1.0 - u[:, 0])) * np.cos(2.0 * np.pi * u[:, 1])

    def integers(self, n: int, low: int, high: int) -> np.ndarray:
        """Integers in ``[low, high)`` by scaling uniforms."""
        return low + np.floor(self.uniform(n) * (high - low)).astype(np.int64)
