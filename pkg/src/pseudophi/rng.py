"""Seeded random streams for synthesis.

Every stream is a Mersenne Twister (MT19937, :class:`random.Random`) seeded
with the integer ``(seed << 64) | stream_id``.  Only ``random()`` and
``getrandbits()`` are used to derive draws, both of which CPython keeps stable
across versions and platforms for integer seeds.  OS entropy is never used.
"""

from __future__ import annotations

import random
from typing import Sequence, TypeVar

T = TypeVar("T")

MASK64 = (1 << 64) - 1


class RandomStream:
    def __init__(self, seed: int, stream_id: int = 0):
        self.seed = int(seed) & MASK64
        self.stream_id = int(stream_id) & MASK64
        self._rng = random.Random((self.seed << 64) | self.stream_id)
        self.draws = 0

    def __repr__(self) -> str:
        return f"RandomStream(seed={self.seed}, stream_id={self.stream_id}, draws={self.draws})"

    def spawn(self, stream_id: int) -> "RandomStream":
        """A new stream sharing this seed."""
        return RandomStream(self.seed, stream_id)

    def random(self) -> float:
        self.draws += 1
        return self._rng.random()

    def randbelow(self, n: int) -> int:
        """Uniform integer in ``[0, n)`` by rejection sampling on raw bits."""
        if n <= 0:
            raise ValueError("n must be positive")
        k = n.bit_length()
        while True:
            self.draws += 1
            r = self._rng.getrandbits(k)
            if r < n:
                return r

    def randint(self, a: int, b: int) -> int:
        """Uniform integer in ``[a, b]``."""
        if b < a:
            raise ValueError(f"empty range [{a}, {b}]")
        return a + self.randbelow(b - a + 1)

    def choice(self, seq: Sequence[T]) -> T:
        if not seq:
            raise IndexError("choice from empty sequence")
        return seq[self.randbelow(len(seq))]

    def digits(self, n: int) -> str:
        return "".join("0123456789"[self.randbelow(10)] for _ in range(n))
