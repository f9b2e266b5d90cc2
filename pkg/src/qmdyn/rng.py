"""Pinned splitmix64 generator.  Every seeded experiment draws from here."""

from __future__ import annotations

from bisect import bisect_right
from fractions import Fraction
from typing import Sequence

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def _finalize(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def splitmix64(x: int) -> int:
    """First output of a generator seeded with ``x``."""
    return _finalize((x + GOLDEN) & MASK64)


def sub_seed(seed: int, i: int) -> int:
    return splitmix64((seed ^ i) & MASK64)


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN) & MASK64
        return _finalize(self.state)

    def random(self) -> float:
        """Uniform float in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def randbelow(self, n: int) -> int:
        if n <= 0:
            raise ValueError("n must be positive")
        # rejection keeps the draw exactly uniform
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            r = self.next_u64()
            if r < limit:
                return r % n


class InverseCDF:
    """Exact inversion sampler over a list of rational probabilities.

    Index i is returned when u = r / 2**64 falls in [cum_{i-1}, cum_i).
    """

    def __init__(self, probs: Sequence[Fraction]):
        total = Fraction(0)
        self.thresholds = []
        for p in probs:
            total += p
            # r < cum * 2**64  <=>  r < ceil(cum * 2**64) for integer r
            x = total * (1 << 64)
            self.thresholds.append(-((-x.numerator) // x.denominator))
        if total != 1:
            raise ValueError(f"probabilities sum to {total}, not 1")

    def draw(self, rng: SplitMix64) -> int:
        return bisect_right(self.thresholds, rng.next_u64())
