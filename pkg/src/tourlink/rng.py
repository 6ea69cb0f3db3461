"""Deterministic random stream used by every randomized operation.

The generator is pinned to a named, versioned algorithm (``splitmix64/v1``)
so that seeded artifacts are bit-reproducible across machines and across
reimplementations in other languages: the state advances by the splitmix64
recurrence and bits are consumed least-significant-first from each output
word.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1
GENERATOR_NAME = "splitmix64/v1"


class DeterministicRng:
    """Seeded bit/word stream with a few derived sampling helpers.

    All derived draws (``below``, ``shuffle``, ``sample``) are defined in
    terms of the bit stream only, so their outputs are part of the
    reproducibility contract.
    """

    __slots__ = ("_state", "_buf", "_nbits")

    def __init__(self, seed: int):
        self._state = seed & MASK64
        self._buf = 0
        self._nbits = 0

    def next_word(self) -> int:
        """Next 64-bit output of the splitmix64 recurrence."""
        self._state = (self._state + 0x9E3779B97F4A7C15) & MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def bits(self, k: int) -> int:
        """Next k bits of the stream, LSB-first within each word."""
        while self._nbits < k:
            self._buf |= self.next_word() << self._nbits
            self._nbits += 64
        out = self._buf & ((1 << k) - 1)
        self._buf >>= k
        self._nbits -= k
        return out

    def bit(self) -> int:
        return self.bits(1)

    def below(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection sampling."""
        if n <= 0:
            raise ValueError("below() requires n >= 1")
        if n == 1:
            return 0
        k = (n - 1).bit_length()
        while True:
            v = self.bits(k)
            if v < n:
                return v

    def shuffle(self, items: list) -> list:
        """In-place Fisher-Yates shuffle; returns the same list."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]
        return items

    def sample(self, population, k: int) -> list:
        """k distinct elements, drawn by shuffling a copy."""
        pool = list(population)
        if k > len(pool):
            raise ValueError("sample size exceeds population")
        self.shuffle(pool)
        return pool[:k]
