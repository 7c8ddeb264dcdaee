from fractions import Fraction

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rigidseq import odometer as Od
from rigidseq import rankone as R
from rigidseq.errors import ConstructionError

BINARY = Od.OdometerSystem.constant(2)
FACT = Od.OdometerSystem.affine(1, 2)
SYSTEMS = [BINARY, Od.OdometerSystem.constant(3), FACT, Od.OdometerSystem([2, 3, 2, 5, 2, 7])]


def test_heights():
    assert FACT.heights().terms(5) == [2, 6, 24, 120, 720]
    assert [FACT.n(t) for t in range(4)] == [1, 2, 6, 24]
    assert BINARY.heights().terms(4) == [2, 4, 8, 16]


def test_add_examples():
    assert BINARY.point([1, 1]).add(1).prefix == (0, 0, 1)
    sys = Od.OdometerSystem([2, 3, 4])
    assert sys.digits(6) == [0, 0, 1]
    assert sys.point([1, 2, 2]).add(1).prefix == (0, 0, 3)
    # a finite ratio list has no digit to carry into
    with pytest.raises(ConstructionError):
        sys.point([1, 2, 3]).add(1)
    with pytest.raises(ConstructionError):
        FACT.point([1, 2], extension="none").add(1)
    with pytest.raises(ConstructionError):
        sys.point([2])


@given(st.integers(0, 10**6), st.integers(0, 10**6), st.integers(0, 50))
def test_add_is_additive(r, s, seed):
    x = FACT.point(extension="sample", seed=seed)
    assert x.add(r).add(s).digits(12) == x.add(r + s).digits(12)


@given(st.integers(0, 10**6), st.integers(1, 20), st.integers(0, 1000))
def test_character_multiplicativity(r, m, seed):
    # 1_{n_m}(T^r x) = exp(2 pi i r/n_m) 1_{n_m}(x)
    x = FACT.point(extension="sample", seed=seed)
    assert Od.character(m, x.add(r)) % 1 == (Od.character(m, x) + Fraction(r, FACT.n(m))) % 1


def test_sample_extension_reproducible():
    a = FACT.point(extension="sample", seed=7)
    b = FACT.point(extension="sample", seed=7)
    assert a.digits(30) == b.digits(30)
    assert all(0 <= d < FACT.rho(t) for t, d in enumerate(a.digits(30)))


def _direct_sum(f, x, n):
    """sum_{j<n} f(T^j x), evaluating every character along the orbit."""
    with mpmath.workprec(100):
        tot = mpmath.mpc(0)
        y = x
        for _ in range(n):
            for e in f.entries:
                tot += e.value() * Od.character_value(e.m, y, prec=100)
            y = y.add(1)
    return complex(tot)


@pytest.mark.parametrize("n", [0, 1, 5, 37, 130])
def test_cocycle_sum_matches_orbit_sum(n):
    f = Od.CocycleSpec.from_coefficients(FACT, {1: Fraction(1, 2), 2: -1, 4: Fraction(3, 7)})
    x = FACT.point([1, 0, 3], extension="sample", seed=3)
    assert abs(Od.cocycle_sum(f, x, n).value - _direct_sum(f, x, n)) < 1e-12


@given(st.integers(0, 2000), st.integers(0, 2000), st.integers(0, 99))
def test_cocycle_identity(n, k, seed):
    f = Od.good_function(BINARY, 8)
    x = BINARY.point(extension="sample", seed=seed)
    lhs = Od.cocycle_sum(f, x, n + k).value
    rhs = Od.cocycle_sum(f, x, n).value + Od.cocycle_sum(f, x.add(n), k).value
    assert abs(lhs - rhs) < 1e-9


def test_cocycle_basic_values():
    f = Od.CocycleSpec.from_coefficients(BINARY, {3: 1})
    x = BINARY.unit()
    assert Od.cocycle_sum(f, x, 0).value == 0
    assert abs(Od.cocycle_sum(f, BINARY.point(), 1).value - 1) < 1e-15
    g = Od.good_function(FACT, 6)
    m0 = g.entries[2].m
    v = Od.cocycle_sum(g, FACT.point(extension="sample"), FACT.n(m0))
    assert set(v.vanished) == {e.m for e in g.entries if e.m <= m0}


def test_norm_bound_holds_for_good_function():
    f = Od.good_function(BINARY, 30)
    for m0 in range(1, 25):
        nb = Od.cocycle_norm_bound(f, m0)
        assert nb.lower <= nb.upper and nb.holds


def test_norm_bound_against_direct_orbit_average():
    # ||f^{(n)}||^2 over the depth-d cyclic model equals the uniform average over levels
    f = Od.CocycleSpec.from_coefficients(BINARY, {2: 1, 3: Fraction(1, 2), 5: Fraction(1, 4)})
    d = 5
    N = BINARY.n(d)
    with mpmath.workprec(100):
        acc = mpmath.mpf(0)
        for r in range(N):
            x = BINARY.point(BINARY.digits(r) + [0] * d)
            acc += abs(Od.cocycle_sum(f, x, BINARY.n(2), prec=100).value) ** 2
        avg = acc / N
    nb = Od.cocycle_norm_bound(f, 2)
    assert float(nb.lower) - 1e-9 <= avg <= float(nb.upper) + 1e-9


def test_good_function_decay_stays_bounded():
    f = Od.good_function(BINARY, 20)
    rows = Od.good_function_decay(f, f.trunc - 1)
    assert max(r[2] for r in rows) <= 8


def test_coboundary_fits():
    rep = Od.coboundary_test(Od.good_function(BINARY, 200))
    assert rep.fit == "harmonic" and rep.diverging
    assert rep.partial_sums == [Od.harmonic(k) for k in range(1, 201)]
    rep = Od.coboundary_test(Od.harmonic_weights(FACT, 40))
    assert rep.fit == "inverse-square" and not rep.diverging
    assert rep.total < Fraction(1645, 1000)
    assert Od.coboundary_test(Od.CocycleSpec(BINARY, (), 3)).fit == "zero"


def test_cocycle_spec_validation():
    with pytest.raises(ConstructionError):
        Od.CocycleSpec(BINARY, (Od.CocycleEntry(2, Fraction(1)), Od.CocycleEntry(2, Fraction(1))), 3)
    with pytest.raises(ConstructionError):
        Od.CocycleSpec(BINARY, (Od.CocycleEntry(4, Fraction(1)),), 3)
    with pytest.raises(ConstructionError):
        Od.cocycle_norm_bound(Od.good_function(BINARY, 3), 10)


def test_cylinder_delta_examples():
    assert Od.cylinder_delta(BINARY, 4, 2) == Fraction(1, 4)
    assert Od.cylinder_delta(BINARY, 8, 2) == 0
    assert Od.trailing_zero_digits(BINARY, 12) == 2
    assert Od.trailing_zero_digits(FACT, 12) == 2
    assert Od.rigidity_profile(FACT, 3, 5) == [(1, Fraction(1, 12)), (2, Fraction(1, 12)),
                                               (3, 0), (4, 0), (5, 0)]


@pytest.mark.parametrize("sys", SYSTEMS, ids=lambda s: s.label)
def test_cylinder_delta_bruteforce(sys):
    t0 = 0
    while sys.n(t0 + 1) <= 300:
        h = sys.n(t0 + 1)
        Od.check_cylinder_delta(sys, t0, range(1, 2 * h + 2))
        t0 += 1


@given(st.integers(1, 10**9))
def test_exact_trailing_zeros_give_full_delta(r):
    t0 = Od.trailing_zero_digits(FACT, r)
    assert Od.cylinder_delta(FACT, r, t0) == Fraction(2, FACT.n(t0 + 1))


def test_nonrecurrent_on_odometer():
    cyc, A = Od.base_cylinder(FACT, 2, 6)
    res = R.nonrecurrent_set_from_rigidity(cyc, A, FACT.heights())
    assert res.p_C > 0 and len(res.indices) == 20
    assert all(v == 0 for v in res.intersections)


def test_bounded_ratio_experiment_is_data_only():
    out = Od.bounded_ratio_experiment(Fraction(3, 2), count=16, k_values=(2, 4), samples=20)
    assert set(out["rows"]) == {2, 4}
    assert out["heights"][:4] == [1, 1, 2, 3]
    assert Od.greedy_expansion([1, 2, 4, 8], 11) == [1, 1, 0, 1]


def test_from_spec():
    assert Od.from_spec({"affine": [1, 2]}).n(3) == 24
    assert Od.from_spec({"constant": 3}).n(2) == 9
    assert Od.from_spec({"ratios": [2, 5]}).n(2) == 10
    with pytest.raises(ConstructionError):
        Od.from_spec({"bogus": 1})
