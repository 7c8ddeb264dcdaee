from fractions import Fraction

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rigidseq import measures as Me
from rigidseq import sequences as S
from rigidseq._exact import dist_to_int, mod1_ratio
from rigidseq.errors import ConstructionError

angles = st.fractions(0, 1, max_denominator=64)


@st.composite
def atomic(draw):
    k = draw(st.integers(1, 4))
    angs = draw(st.lists(angles, min_size=k, max_size=k))
    ws = draw(st.lists(st.integers(1, 9), min_size=k, max_size=k))
    tot = sum(ws)
    return Me.Atomic([(a, Fraction(w, tot)) for a, w in zip(angs, ws)])


def _riesz_oracle(n, K):
    """Direct product of the factors 1 - 2 a_k b_k (1 - cos 2 pi n 2^-k)."""
    with mpmath.workprec(200):
        p = mpmath.mpf(1)
        for k in range(1, K + 1):
            b = mpmath.mpf(1) / (k + 1)
            p *= 1 - 2 * (1 - b) * b * (1 - mpmath.cos(2 * mpmath.pi * n / mpmath.mpf(2) ** k))
        return p


def test_zero_coefficient_is_one():
    for mu in (Me.Atomic.dirac(Fraction(1, 3)), Me.RieszFactors.dyadic(), Me.OdometerBlock(S.powers(2))):
        assert mu.fourier(0).value == 1


def test_dirac_at_zero():
    assert Me.Atomic.dirac().fourier(12345).value == 1
    prof = Me.rigidity_gap_profile(Me.Atomic.dirac(), S.powers(3), 10)
    assert all(g.lower <= 0 <= g.upper for g in prof)


@given(atomic(), st.integers(-500, 500))
def test_atomic_bounded_and_conjugate_symmetric(mu, n):
    f, g = mu.fourier(n).value, mu.fourier(-n).value
    assert abs(f) <= 1 + 1e-12
    assert abs(f - g.conjugate()) < 1e-12


@given(atomic(), st.integers(-200, 200))
def test_symmetrization_gives_squared_modulus(mu, n):
    assert abs(mu.symmetrize().fourier(n).value - abs(mu.fourier(n).value) ** 2) < 1e-12


def test_atomic_validation():
    with pytest.raises(ConstructionError):
        Me.Atomic([(0, Fraction(1, 2))])
    assert Me.Atomic([(0, Fraction(1, 2)), (1, Fraction(1, 2))]).atoms == [(0, 1)]


@pytest.mark.parametrize("m", [3, 8, 15, 30])
def test_riesz_matches_direct_product(m):
    mu = Me.RieszFactors.dyadic()
    fv = mu.fourier(2**m, m + 60)
    ref = _riesz_oracle(2**m, m + 60)
    with mpmath.workprec(200):
        assert fv.lower - mpmath.mpf(2) ** -100 <= ref <= fv.upper + mpmath.mpf(2) ** -100
        assert fv.upper - fv.lower < mpmath.mpf(10) ** -20


@given(st.integers(-10**6, 10**6))
def test_riesz_values_real_in_unit_interval(n):
    fv = Me.RieszFactors.dyadic().fourier(n, 40)
    assert fv.value.imag == 0
    assert 0 <= fv.value.real <= 1


def test_atom_bound_examples():
    assert Me.RieszFactors.constant_weight("1/2").atom_bound(1) == Fraction(3, 2)
    mu = Me.RieszFactors.constant_weight("1/4")
    assert mu.atom_bound(7) == 3 * (1 - 2 * Fraction(3, 4) * Fraction(1, 4)) ** 7
    assert Me.RieszFactors.dyadic().atom_bound(200) < Fraction(1, 10)


def test_riesz_gap_decays_along_powers_and_not_along_shift():
    mu = Me.RieszFactors.dyadic()
    gaps = Me.rigidity_gap_profile(mu, S.powers(2), 40, K=lambda m: m + 60, M_min=5)
    assert all(g.upper <= 2 * mpmath.pi**2 / g.m for g in gaps)
    shifted = Me.rigidity_gap_profile(mu, S.shifted(S.powers(2), 1), 30, K=lambda m: m + 60, M_min=10)
    assert all(g.lower >= 0.5 for g in shifted)


def test_wiener_averages():
    assert Me.wiener_average(Me.Atomic.dirac(), 50) == pytest.approx(1)
    two = Me.Atomic([(0, Fraction(1, 2)), (Fraction(1, 2), Fraction(1, 2))])
    assert abs(Me.wiener_average(two, 500) - 0.5) < 0.01
    assert Me.wiener_average(Me.RieszFactors.dyadic(), 2**12) < 0.05


def test_block_measure_quantities():
    mu = Me.OdometerBlock(S.powers(2))
    for k in range(6):
        assert mu.nu_D(k) == (1 - Fraction(1, k + 2)) * (1 - Fraction(1, k + 3))
    masses = [mu.zero_point_mass(K) for K in range(1, 40)]
    assert all(b < a for a, b in zip(masses, masses[1:]))
    # with eps_k = 1/(k+2) the product telescopes to 1/(K+1)
    assert masses[-1] == Fraction(1, 40)


@given(st.integers(-10**6, 10**6))
def test_block_conjugate_symmetric(n):
    mu = Me.OdometerBlock(S.powers(2))
    f, g = mu.fourier(n, prec=80), mu.fourier(-n, prec=80)
    assert abs(f.value - g.value.conjugate()) < 1e-15
    assert abs(f.value) <= 1 + 1e-15


def test_block_norm_bound_on_D():
    mu = Me.OdometerBlock(S.powers(2))
    pts = mu.sample(3000, rng_seed=1)
    for M in (3, 5, 10, 20):
        k = mu.k_of(M)
        bound = mu.norm_bound(M)
        inside = [x for x in pts if mu.in_D(k, x)]
        assert inside
        assert all(dist_to_int(mod1_ratio(2**M, x)) <= bound for x in inside)


def test_block_rejects_non_integer_ratios():
    with pytest.raises(ConstructionError):
        Me.OdometerBlock(S.explicit([2, 6, 9, 18, 36, 72, 144, 288, 576, 1152, 2304, 4608, 9216,
                                     18432, 36864, 73728, 147456, 294912, 589824, 1179648,
                                     2359296, 4718592, 9437184, 18874368, 37748736, 75497472,
                                     150994944, 301989888, 603979776, 1207959552, 2415919104,
                                     4831838208, 9663676416, 19327352832, 38654705664,
                                     77309411328])).fourier(5)


def test_cantor_support_examples():
    seq = S.power_of_polynomial(2, [0, 0, 1])
    arcs = Me.cantor_support(seq, lambda m: m * m)
    assert arcs.start == 3
    pts = arcs.sample(400, rng_seed=2)
    for lv in arcs.levels:
        assert all(dist_to_int(mod1_ratio(lv.n, x)) <= Fraction(1, 2 * lv.h) for x in pts)
        fv = arcs.fourier(lv.n)
        assert abs(1 - fv.value) <= mpmath.pi * arcs.fourier_guarantee(lv.m)
    with pytest.raises(ConstructionError):
        Me.cantor_support(S.powers(2), lambda m: 1)


def test_cantor_every_arc_holds_two_roots():
    seq = S.power_of_polynomial(10, [0, 0, 1])
    arcs = Me.cantor_support(seq, lambda m: m * m, depth=3)
    assert arcs.min_next_roots() == [1001, 25001]
    assert all(r >= 2 for r in arcs.min_next_roots())


def test_sampling_dirac():
    assert set(Me.sample(Me.Atomic.dirac(), 20)) == {0}


def test_from_spec():
    assert isinstance(Me.from_spec({"kind": "riesz"}), Me.RieszFactors)
    assert isinstance(Me.from_spec({"kind": "block", "seq": {"kind": "powers", "a": 2}}), Me.OdometerBlock)
    with pytest.raises(ConstructionError):
        Me.from_spec({"kind": "bogus"})


@pytest.mark.parametrize("n", [3, 16386, 2**40 + 7, -(3**30)])
def test_block_value_stable_under_precision(n):
    mu = Me.OdometerBlock(S.powers(2))
    lo, hi = mu.fourier(n, prec=60).value, mu.fourier(n, prec=300).value
    assert abs(lo - hi) < 1e-14
