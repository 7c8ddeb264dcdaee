from fractions import Fraction

import mpmath
from hypothesis import given
from hypothesis import strategies as st

from rigidseq.report import Entry, Report, bracket, fmt_decimal, jsonable, load_report


def test_large_integers_become_strings():
    assert jsonable(2**53 - 1) == 2**53 - 1
    assert jsonable(2**53) == str(2**53)
    assert jsonable(Fraction(-3, 4)) == "-3/4"
    assert jsonable({"z": complex(1, -2)}) == {"z": {"re": 1.0, "im": -2.0}}


@given(st.fractions(-10, 10, max_denominator=10**9))
def test_outward_rounding(x):
    b = bracket(x, x, digits=6)
    assert Fraction(b["lower"]) <= x <= Fraction(b["upper"])
    assert Fraction(b["upper"]) - Fraction(b["lower"]) <= Fraction(1, 10**6)


def test_fmt_decimal_mpf():
    with mpmath.workprec(100):
        third = mpmath.mpf(1) / 3
    assert fmt_decimal(third, 5, "down") == "0.33333"
    assert fmt_decimal(third, 5, "up") == "0.33334"
    assert fmt_decimal(Fraction(-1, 2), 3) == "-0.5"


def test_report_round_trip():
    rep = Report({"seed": 0})
    rep.add("b", Entry("second", result={"x": Fraction(1, 3)}))
    rep.add("a", Entry("first", result=[1, 2]))
    data = load_report(rep.to_json())
    assert list(data["entries"]) == ["a", "b"]
    assert data["entries"]["b"]["result"]["x"] == "1/3"
