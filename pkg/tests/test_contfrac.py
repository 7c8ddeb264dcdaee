from fractions import Fraction
from math import floor

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rigidseq._exact import (as_fraction, dist_to_int, dist_to_int_interval, fmt_fraction,
                             frac_part, mod1_ratio)
from rigidseq.contfrac import ContinuedFraction
from rigidseq.errors import ConstructionError, PrecisionError

fractions = st.fractions(min_value=-50, max_value=50, max_denominator=10**6)


@given(fractions)
def test_frac_part_in_unit_interval(x):
    f = frac_part(x)
    assert 0 <= f < 1 and (x - f).denominator == 1


@given(st.integers(-10**30, 10**30), fractions)
def test_mod1_ratio_matches_definition(n, x):
    assert mod1_ratio(n, x) == frac_part(n * x)


@given(fractions)
def test_dist_to_int_is_distance_to_nearest_integer(x):
    d = dist_to_int(x)
    assert d == min(x - floor(x), floor(x) + 1 - x)


@given(fractions, fractions)
def test_dist_interval_contains_sampled_values(a, b):
    lo, hi = min(a, b), max(a, b)
    dlo, dhi = dist_to_int_interval(lo, hi)
    for i in range(9):
        x = lo + (hi - lo) * Fraction(i, 8)
        assert dlo <= dist_to_int(x) <= dhi


def test_parsing_and_formatting():
    assert as_fraction("3/4") == Fraction(3, 4)
    assert as_fraction("0.25") == Fraction(1, 4)
    assert fmt_fraction(Fraction(6, 4)) == "3/2"
    assert fmt_fraction(Fraction(4, 2)) == "2"
    with pytest.raises(TypeError):
        as_fraction(True)


def test_golden_denominators_are_fibonacci():
    assert ContinuedFraction.golden_mean().denominators(7) == [1, 1, 2, 3, 5, 8, 13]


def test_silver_denominators():
    assert ContinuedFraction.silver().denominators(5) == [1, 2, 5, 12, 29]


@given(st.fractions(min_value=0, max_value=10, max_denominator=10**5))
def test_rational_expansion_round_trips(x):
    cf = ContinuedFraction.from_fraction(x)
    n = cf.length
    p, q = cf.convergent(n)
    assert Fraction(p, q) == x


@given(st.lists(st.integers(1, 9), min_size=1, max_size=5), st.integers(1, 40))
def test_determinant_identity(period, n):
    cf = ContinuedFraction(0, (), period)
    p1, q1 = cf.convergent(n)
    p0, q0 = cf.convergent(n - 1)
    assert p1 * q0 - p0 * q1 == (-1) ** (n - 1)


@given(st.lists(st.integers(1, 9), min_size=1, max_size=4), st.integers(0, 30))
def test_enclosure_contains_value(period, n):
    cf = ContinuedFraction(0, (), period)
    lo, hi = cf.enclosure(n)
    deep_lo, deep_hi = cf.enclosure(n + 5)
    assert lo <= deep_lo <= deep_hi <= hi


def test_norm_interval_brackets_golden():
    cf = ContinuedFraction.golden_mean()
    with mpmath.workdps(80):
        phi = (mpmath.sqrt(5) - 1) / 2
        for n in (1, 7, 10**6 + 3, 3**40):
            lo, hi = cf.norm_interval(n, 64)
            v = n * phi
            d = abs(v - mpmath.nint(v))
            assert mpmath.mpf(lo.numerator) / lo.denominator <= d + mpmath.mpf(10) ** -70
            assert d <= mpmath.mpf(hi.numerator) / hi.denominator + mpmath.mpf(10) ** -70
            assert hi - lo <= Fraction(1, 2**64)


def test_decimal_input_limits_known_quotients():
    cf = ContinuedFraction.from_decimal("0.6180339887")
    assert cf.quotient(1) == 1
    with pytest.raises(PrecisionError):
        cf.quotient(40)


def test_invalid_quotients_rejected():
    with pytest.raises(ConstructionError):
        ContinuedFraction(0, (1, 0))


def test_from_spec_forms():
    assert ContinuedFraction.from_spec("golden").denominators(3) == [1, 1, 2]
    assert ContinuedFraction.from_spec([0, 2, 2]).length == 2
    assert ContinuedFraction.from_spec({"period": [2]}).denominators(3) == [1, 2, 5]
