"""SplitMix64 generator shared by weight init and corpus synthesis.

Pure integer arithmetic modulo 2**64, so a given seed produces the same
stream on every platform and in every language that implements the
reference algorithm.
"""

from __future__ import annotations

import numpy as np

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_UNIT = 1.0 / (1 << 53)


def scramble(z: int) -> int:
    """SplitMix64 output function (the mixing finalizer)."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def mix(seed: int, index: int) -> int:
    """Derive an independent child seed.

    Equal to output number ``index + 1`` of a SplitMix64 stream seeded with
    ``seed``, so child streams never depend on how many values a sibling drew.
    """
    return scramble((seed + GOLDEN_GAMMA * (index + 1)) & MASK64)


class SplitMix64:
    def __init__(self, seed: int) -> None:
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        return scramble(self.state)

    def next_unit(self) -> float:
        """Uniform real in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * _UNIT

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.next_unit()

    def units(self, n: int) -> np.ndarray:
        """Next ``n`` unit reals as an array; identical to ``n`` next_unit calls."""
        if n <= 0:
            return np.empty(0, dtype=np.float64)
        steps = np.arange(1, n + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            z = np.uint64(self.state) + steps * np.uint64(GOLDEN_GAMMA)
            z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
            z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
            z = z ^ (z >> np.uint64(31))
        self.state = (self.state + GOLDEN_GAMMA * n) & MASK64
        return (z >> np.uint64(11)).astype(np.float64) * _UNIT


# Spec-facing alias.
DeterministicRng = SplitMix64
