"""Small exact-arithmetic helpers used by several modules."""
from __future__ import annotations

from fractions import Fraction
from math import floor

HALF = Fraction(1, 2)


def frac_part(x: Fraction) -> Fraction:
    """x mod 1 in [0, 1)."""
    return x - floor(x)


def mod1_ratio(n: int, x: Fraction) -> Fraction:
    """n*x mod 1 computed with integers only."""
    return Fraction((n * x.numerator) % x.denominator, x.denominator)


def dist_to_int(x: Fraction) -> Fraction:
    """||x||, the distance from x to the nearest integer."""
    f = frac_part(Fraction(x))
    return f if f <= HALF else 1 - f


def dist_to_int_interval(lo: Fraction, hi: Fraction) -> tuple[Fraction, Fraction]:
    """Exact range of ||x|| for x in [lo, hi]."""
    if hi < lo:
        raise ValueError("empty interval")
    if hi - lo >= 1:
        return Fraction(0), HALF
    dl, dh = dist_to_int(lo), dist_to_int(hi)
    low, high = min(dl, dh), max(dl, dh)
    # the distance function peaks at half-integers and vanishes at integers
    k = floor(lo)
    if any(lo <= k + j <= hi for j in (0, 1)):
        low = Fraction(0)
    if any(lo <= k + j + HALF <= hi for j in (-1, 0, 1)):
        high = HALF
    return low, high


def as_fraction(value) -> Fraction:
    """Parse ints, Fractions and "p/q" or decimal strings exactly."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, float):
        return Fraction(value)
    raise TypeError(f"cannot read {value!r} as an exact rational")


def fmt_fraction(x: Fraction) -> str:
    """Serialize a rational as "p/q" (integers as plain "p")."""
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def bit_length(n: int) -> int:
    return abs(int(n)).bit_length()
