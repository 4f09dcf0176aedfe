"""SplitMix64: the fixed, documented PRNG behind every seeded draw.

The generator keeps a single 64-bit state. ``next_u64`` adds the golden-ratio
increment and applies the standard SplitMix64 finalizer. Bounded integers use
rejection sampling on the top of the 64-bit range, so the stream of draws is
fully determined by the seed and is easy to reproduce in any language.

Per-trial generators come from :func:`trial_rng`, which mixes the campaign
seed with the trial index; trials therefore never share a stream and can run
in any order.
"""
from __future__ import annotations

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


class SplitMix64:
    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN) & MASK64
        return mix64(self.state)

    def below(self, n: int) -> int:
        """Uniform integer in ``[0, n)``."""
        if n <= 0:
            raise ValueError("bound must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in ``[lo, hi]`` (inclusive)."""
        return lo + self.below(hi - lo + 1)

    def chance(self, num: int, den: int) -> bool:
        return self.below(den) < num

    def choice(self, seq):
        return seq[self.below(len(seq))]

    def split(self, key: int) -> "SplitMix64":
        """Independent child stream keyed by ``key``; does not advance self."""
        return SplitMix64(mix64(self.state ^ mix64((key + 1) * GOLDEN)))


def trial_rng(seed: int, trial: int) -> SplitMix64:
    return SplitMix64(mix64((seed & MASK64) ^ mix64((trial + 1) * GOLDEN)))
