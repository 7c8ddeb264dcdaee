from fractions import Fraction

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rigidseq import obstruct as O
from rigidseq import sequences as S
from rigidseq.contfrac import ContinuedFraction
from rigidseq.errors import PrecisionError, ResourceError


@pytest.mark.parametrize("seq,coeffs,d", [
    (S.shifted(S.powers(2), 1), (2, -1), 1),
    (S.perturbed_powers(2, [0, 1]), (-2, 3, -1), 1),
    (S.squares(), (1, -2, 1), 2),
])
def test_known_witnesses(seq, coeffs, d):
    w = O.differencing_obstruction(seq)
    assert w.coefficients == coeffs and w.constant == d
    assert w.verify(seq)
    assert all(w.evaluate(seq, m) == d for m in range(1, 60))


@pytest.mark.parametrize("a", [2, 3, 4, 5])
def test_powers_have_no_witness(a):
    assert O.differencing_obstruction(S.powers(a)) is None


def test_witness_rejects_a_broken_form():
    w = O.LinearFormWitness((2, -1), 1, 1, 16)
    assert not w.verify(S.powers(2))


def test_search_budget():
    with pytest.raises(ResourceError) as exc:
        O.differencing_obstruction(S.powers(2), budget=10)
    assert exc.value.partial["tried"] == 10
    with pytest.raises(ValueError):
        O.differencing_obstruction(S.powers(2), K_max=7)
    with pytest.raises(ValueError):
        O.differencing_obstruction(S.powers(2), W=4)


def test_doubling_residue():
    assert O.doubling_residue(S.shifted(S.powers(2), 1), 5) == [-1] * 5


def test_weyl_at_zero_and_half():
    prof = O.weyl_profile(S.squares(), points=[Fraction(0)], M=50)
    assert prof.averages == [1]
    prof = O.weyl_profile(S.explicit([1, 2]), points=[Fraction(1, 2)], M=2)
    assert prof.averages == [0]


def test_weyl_squares_equidistribute():
    prof = O.weyl_profile(S.squares(), sample_count=8, rng_seed=0, M=4096)
    assert prof.equidistribution_evidence
    assert all(abs(a) <= 1 for a in prof.averages)


def test_weyl_precision_guard():
    with mpmath.workprec(40):
        x = mpmath.mpf(1) / 3
    with pytest.raises(PrecisionError):
        O.weyl_profile(S.powers(2), points=[x], M=64)
    with pytest.raises(PrecisionError):
        O.weyl_profile(S.powers(2), points=[0.3], M=64)


def test_norm_sum_dyadic():
    s = O.abs_norm_partial_sum(S.powers(2), Fraction(1, 2**10), 30)
    assert s.lower == s.upper == sum(Fraction(1, 2**k) for k in range(1, 10))


def test_norm_sum_of_denominators_bounded_by_reciprocals():
    cf = ContinuedFraction.golden_mean()
    seq = S.continued_fraction_denominators(cf)
    s = O.abs_norm_partial_sum(seq, cf, 40)
    assert s.upper <= sum(Fraction(1, q) for q in seq.terms(40))
    assert s.error <= 40 * Fraction(1, 2**64)


def test_norm_sum_mpf_input():
    with mpmath.workprec(200):
        x = mpmath.mpf(1) / 3
        s = O.abs_norm_partial_sum(S.powers(2), x, 20)
    exact = O.abs_norm_partial_sum(S.powers(2), Fraction(1, 3), 20).value
    assert s.lower <= exact <= s.upper
    with mpmath.workprec(60):
        with pytest.raises(PrecisionError):
            O.abs_norm_partial_sum(S.powers(2), mpmath.mpf(1) / 3, 20)


@given(st.fractions(0, 1, max_denominator=10**6), st.integers(1, 30))
def test_norm_sum_monotone_in_M(x, M):
    a = O.abs_norm_partial_sum(S.powers(3), x, M)
    b = O.abs_norm_partial_sum(S.powers(3), x, M + 1)
    assert a.value <= b.value


def test_sumset_examples():
    p = O.sumset_density_probe(S.squares(), (1, -1), 99)
    assert p.density >= Fraction(50, 199)
    assert p.contains_zero and p.nonzero_density == p.density - Fraction(1, 199)
    p = O.sumset_density_probe(S.powers(2), (1,), 1024)
    assert p.density == Fraction(10, 2049)


def test_sumset_budget():
    with pytest.raises(ResourceError):
        O.sumset_density_probe(S.squares(), (1, -1, 1), 1000, budget=1000)
