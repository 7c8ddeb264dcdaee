from fractions import Fraction

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rigidseq import rotation as Ro
from rigidseq.contfrac import ContinuedFraction
from rigidseq.errors import ConstructionError

GOLDEN = ContinuedFraction.golden_mean()


def _norm_hp(n, alpha_mp):
    x = n * alpha_mp
    return abs(x - mpmath.nint(x))


def _golden_mp():
    return (mpmath.sqrt(5) - 1) / 2


def test_golden_convergents():
    assert [Ro.convergents("golden", n)[1] for n in range(8)] == [1, 1, 2, 3, 5, 8, 13, 21]


@given(st.fractions(0, 1, max_denominator=500), st.integers(0, 300), st.integers(1, 300),
       st.fractions(Fraction(1, 400), Fraction(1, 2), max_denominator=400))
def test_count_hits_matches_brute_force(alpha, lo, span, t):
    cf = ContinuedFraction.from_fraction(alpha)
    hi = lo + span
    brute = 0
    for n in range(lo + 1, hi + 1):
        r = (n * alpha) % 1
        brute += min(r, 1 - r) <= t
    assert Ro.count_hits(cf, lo, hi, t) == brute


@given(st.integers(0, 60), st.integers(1, 40), st.integers(-100, 100), st.integers(-100, 100))
def test_floor_sum_matches_brute_force(n, m, a, b):
    assert Ro.floor_sum(n, m, a, b) == sum((a * i + b) // m for i in range(n))


def test_hits_agree_with_high_precision():
    with mpmath.workprec(300):
        g = _golden_mp()
        t = Fraction(1, 50)
        expect = [n for n in range(1, 3000) if _norm_hp(n, g) < mpmath.mpf(t.numerator) / t.denominator]
    assert Ro.hits(GOLDEN, 1, 2999, t) == expect


def test_syndetic_constants_golden():
    got = [Ro.syndeticity_constant(GOLDEN, Fraction(1, 2**s)).N for s in range(1, 8)]
    assert got == [3, 5, 13, 21, 55, 89, 233]


def test_syndetic_third():
    cert = Ro.syndeticity_constant(GOLDEN, Fraction(1, 3))
    assert cert.N == 5 and cert.N_upper == 21
    assert cert.N <= cert.N_upper


@pytest.mark.parametrize("s", [2, 4])
def test_syndetic_windows_recheck(s):
    eps = Fraction(1, 2**s)
    cert = Ro.syndeticity_constant(GOLDEN, eps)
    with mpmath.workprec(300):
        g = _golden_mp()
        half = mpmath.mpf(1) / 2 ** (s + 1)
        good = [_norm_hp(n, g) < half for n in range(1, 2000 + cert.N)]
    for M in range(0, 2000):
        assert any(good[M:M + cert.N])


def test_syndetic_rejects_large_eps():
    with pytest.raises(ValueError):
        Ro.syndeticity_constant(GOLDEN, Fraction(3, 4))


def test_slow_sequence_small():
    res = Ro.slow_rigidity_sequence(GOLDEN, K_max=3)
    assert res.verify()
    Ms = [c.M_k for c in res.checkpoints]
    assert Ms == sorted(Ms)
    terms = res.sequence.terms(min(res.sequence.length, 400))
    with mpmath.workprec(300):
        g = _golden_mp()
        for n in terms:
            cp = next(c for c in res.checkpoints if n <= c.M_k)
            assert _norm_hp(n, g) <= mpmath.mpf(cp.arc.numerator) / cp.arc.denominator


def test_rational_schedule_threshold():
    sched = Ro.RationalSchedule(lambda N: Fraction(1, N))
    assert sched.threshold(Fraction(1, 10)) == 10
    assert sched.exceeded_by(Fraction(1, 9), 10)


def test_log_schedule_threshold():
    sched = Ro.LogSchedule()
    N = sched.threshold(Fraction(1, 4))
    assert 1 / mpmath.log(N + 2) <= 0.25 < 1 / mpmath.log(N + 1)


def _psi(m):
    return m * (m + 1).bit_length() if (m + 1) & m else m * m.bit_length()


def test_psi_helper_is_ceil_log2():
    for m in range(1, 200):
        assert _psi(m) == m * mpmath.ceil(mpmath.log(m + 1, 2))


def test_growth_sequence():
    g = Ro.bounded_growth_rigidity_sequence(GOLDEN, _psi, L_max=3)
    assert g.verify()
    assert g.terms == sorted(g.terms)
    for n, (lo, hi), L in zip(g.terms, g.blocks, g.levels):
        assert lo <= n <= hi
        assert Ro.below(GOLDEN, n, Fraction(1, 2 ** (L + 1)))


def test_growth_rejects_bounded_psi():
    with pytest.raises(ConstructionError):
        Ro.bounded_growth_rigidity_sequence(GOLDEN, lambda m: m)


def test_theta_minorant():
    th = Ro.theta_minorant(lambda m: m * m, 10)
    assert th[1:] == [Fraction(j) for j in range(1, 11)]
    th = Ro.theta_minorant(lambda m: [0, 5, 2, 9, 4][m] * m, 4)
    assert th[1:] == [2, 2, 4, 4]
