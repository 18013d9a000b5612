"""Deterministic, platform-stable randomness.

All sampling in this package goes through :class:`DetRng`, a splitmix64
generator.  It is self-contained (no dependence on CPython's Mersenne
Twister details), so identical seeds give identical draws on every
platform and Python version.  Parallel workers derive independent
streams with :func:`spawn`, keyed by sample index, so results do not
depend on thread count or evaluation order.
"""

from __future__ import annotations

from fractions import Fraction

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix(z: int) -> int:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & _MASK64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _MASK64
    return z ^ (z >> 31)


class DetRng:
    """splitmix64 stream with helpers for bounded integers and rationals."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        return _mix(self._state)

    def below(self, n: int) -> int:
        """Uniform integer in [0, n), by rejection (no modulo bias)."""
        if n <= 0:
            raise ValueError("bound must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            u = self.next_u64()
            if u < limit:
                return u % n

    def int_in(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi] inclusive."""
        if hi < lo:
            raise ValueError("empty range")
        return lo + self.below(hi - lo + 1)

    def fraction(self, height: int) -> Fraction:
        """Random rational with |numerator| <= height, 1 <= denominator <= height."""
        num = self.int_in(-height, height)
        den = self.int_in(1, height)
        return Fraction(num, den)

    def nonzero_fraction(self, height: int) -> Fraction:
        while True:
            x = self.fraction(height)
            if x:
                return x

    def choice(self, seq):
        return seq[self.below(len(seq))]


def child_seed(seed: int, index: int) -> int:
    """Derived seed for sample `index`; independent of draw order elsewhere."""
    return _mix((seed & _MASK64) ^ _mix((index + 1) * _GOLDEN & _MASK64))


def spawn(seed: int, index: int) -> DetRng:
    return DetRng(child_seed(seed, index))
