"""SplitMix64 generator with Box-Muller normals.

The algorithm is fixed so runs reproduce across platforms and languages:
state += 0x9E3779B97F4A7C15, then the standard SplitMix64 output mix.
Uniforms take the top 53 bits.
"""

from __future__ import annotations

import math

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def _mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def fnv1a64(text: str) -> int:
    h = 0xCBF29CE484222325
    for b in text.encode("utf-8"):
        h = ((h ^ b) * 0x100000001B3) & MASK64
    return h


def mix_seed(seed: int, salt: int) -> int:
    """Derive an independent 64-bit seed from ``seed`` and ``salt``."""
    return _mix((_mix((salt + GOLDEN) & MASK64) ^ (seed & MASK64)) & MASK64)


class SplitMix64:
    def __init__(self, seed: int = 0):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN) & MASK64
        return _mix(self.state)

    def random(self) -> float:
        """Uniform in [0, 1)."""
        return (self.next_u64() >> 11) * (1.0 / 9007199254740992.0)

    def normal(self) -> float:
        """Standard normal; always consumes exactly two uniforms."""
        u1 = 1.0 - self.random()
        u2 = self.random()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def split(self, name: str) -> "SplitMix64":
        return SplitMix64(mix_seed(self.state, fnv1a64(name)))
