"""Scalar backends.

Two realizations of the ground field are supported:

* exact -- `fractions.Fraction`.  Closed under field operations, with
  decidable equality; the default everywhere.
* approx -- `gmpy2.mpfr` at a fixed binary precision `p`, with a zero
  tolerance `tol` (default ``2**(-p//2)``).  ``|x| < tol`` is the only
  notion of "is zero" on this backend.

Backends are small stateless-ish objects passed explicitly; approximate
arithmetic always goes through the backend's gmpy2 context, never the
thread-global one, so results are reproducible and reentrant.
"""

from __future__ import annotations

from fractions import Fraction

import gmpy2


class ExactBackend:
    name = "exact"
    precision = None

    def convert(self, x):
        if isinstance(x, Fraction):
            return x
        if isinstance(x, int):
            return Fraction(x)
        if isinstance(x, gmpy2.mpfr):
            raise TypeError("cannot convert an approximate scalar to the exact backend")
        return Fraction(x)

    def zero(self):
        return Fraction(0)

    def one(self):
        return Fraction(1)

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def div(self, a, b):
        return a / b

    def neg(self, a):
        return -a

    def abs(self, a):
        return abs(a)

    def is_zero(self, x) -> bool:
        return x == 0

    def to_text(self, x) -> str:
        return format_rational(x)


class ApproxBackend:
    """Binary floating point at `precision` bits via gmpy2/MPFR."""

    name = "approx"

    def __init__(self, precision: int = 128, tolerance=None):
        if precision < 8:
            raise ValueError("precision must be at least 8 bits")
        self.precision = precision
        self.ctx = gmpy2.context(precision=precision)
        if tolerance is None:
            tolerance = gmpy2.mpfr(2, precision) ** -(precision // 2)
        self.tolerance = gmpy2.mpfr(tolerance, precision)

    def convert(self, x):
        return gmpy2.mpfr(x, self.precision)

    def zero(self):
        return gmpy2.mpfr(0, self.precision)

    def one(self):
        return gmpy2.mpfr(1, self.precision)

    def add(self, a, b):
        return self.ctx.add(a, b)

    def sub(self, a, b):
        return self.ctx.sub(a, b)

    def mul(self, a, b):
        return self.ctx.mul(a, b)

    def div(self, a, b):
        return self.ctx.div(a, b)

    def neg(self, a):
        return self.ctx.minus(a)

    def abs(self, a):
        return abs(a)

    def is_zero(self, x) -> bool:
        return abs(x) < self.tolerance

    def to_text(self, x) -> str:
        return format_mpfr(x)


EXACT = ExactBackend()


def approx_backend(precision: int = 128, tolerance=None) -> ApproxBackend:
    return ApproxBackend(precision, tolerance)


def format_rational(x) -> str:
    """Canonical text for an exact scalar: "p" or "p/q"."""
    f = Fraction(x)
    if f.denominator == 1:
        return str(f.numerator)
    return f"{f.numerator}/{f.denominator}"


def format_mpfr(x) -> str:
    """Deterministic decimal text for an mpfr value (round trips its bits)."""
    if gmpy2.is_nan(x):
        return "nan"
    if gmpy2.is_infinite(x):
        return "inf" if x > 0 else "-inf"
    if x == 0:
        return "0"
    digits, exp, _prec = x.digits(10)
    sign = ""
    if digits.startswith("-"):
        sign, digits = "-", digits[1:]
    return f"{sign}0.{digits}e{exp}"


def parse_rational_text(text: str) -> Fraction:
    text = text.strip()
    if "/" in text:
        num, den = text.split("/", 1)
        return Fraction(int(num), int(den))
    return Fraction(int(text))
