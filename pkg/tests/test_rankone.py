from fractions import Fraction

import numpy as np
import pytest

from rigidseq import rankone as R
from rigidseq import sequences as S
from rigidseq.errors import ConstructionError, ResourceError


def test_chacon_heights():
    spec = R.chacon()
    assert [spec.height(m) for m in range(4)] == [1, 4, 13, 40]
    assert R.build(spec, 3).height == 40


def test_chacon_words():
    assert R.chacon_word(0).word == "0"
    assert R.chacon_word(1).word == "0010"
    w2 = R.chacon_word(2)
    assert w2.word == "0010" + "0010" + "1" + "0010" and w2.length == 13
    assert R.rle("0010") == "0*2 1 0"


@pytest.mark.parametrize("k", range(13))
def test_chacon_one_count(k):
    assert R.chacon_word(k).ones == (3**k - 1) // 2


def test_chacon_nonrecurrence_examples():
    assert R.chacon_nonrecurrence_check(2, 1)
    assert all(R.chacon_nonrecurrence_check(7, m) for m in range(1, 7))
    # shifting by h_m instead of h_m - 1 finds a common occurrence
    assert not R.chacon_nonrecurrence_check(3, 1, shift=R.chacon_height(1))
    # marking every spacer symbol is a strictly stronger statement, already false here
    assert not R.chacon_nonrecurrence_check(2, 1, all_spacers=True)


def test_chacon_check_against_a_slow_oracle():
    for k in range(2, 7):
        w = R.chacon_spacer_word(k, 1)
        ones = {i for i, c in enumerate(w) if c == "1"}
        for m in range(1, k):
            s = R.chacon_height(m) - 1
            assert R.chacon_nonrecurrence_check(k, m) == (not any(i + s in ones for i in ones))


def test_pure_concatenation():
    spec = R.concatenation(2, 3)
    assert [spec.height(m) for m in range(1, 6)] == [3 * 2 ** (m - 1) for m in range(1, 6)]
    assert {spec.mass(m) for m in range(1, 6)} == {3}


def test_delta_with_zero_shift():
    br = R.delta_mass(R.chacon(), 2, [0, 5], 0)
    assert br.delta_lower == br.delta_upper == 0


def test_chacon_base_returns_half():
    for m in range(6, 9):
        br = R.delta_mass(R.chacon(), m, [0], R.chacon_height(m), tol=Fraction(1, 10**4))
        lo = br.inter_lower / br.mu_E
        hi = br.inter_upper / br.mu_E
        assert lo - Fraction(1, 10**4) <= Fraction(1, 2) <= hi + Fraction(1, 10**4)


def test_brackets_are_nested_under_refinement():
    spec = R.chacon()
    prev = None
    for M in range(3, 9):
        br = R._bracket_at(R.build(spec, M), 2, [0, 3, 7], 17)
        assert br.minus_lower <= br.minus_upper
        assert br.delta_lower == 2 * br.minus_lower
        if prev is not None:
            assert prev.inter_lower <= br.inter_lower <= br.inter_upper <= prev.inter_upper
        prev = br


def test_eps_rigidity_passes_to_lower_towers():
    spec = R.chacon()
    eps = Fraction(6, 5)
    for n in (4, 13, 40):
        if R.is_eps_rigid(spec, 4, n, eps, 7):
            assert all(R.is_eps_rigid(spec, k, n, eps, 7) for k in range(0, 4))


def test_level_intervals_partition_the_mass():
    spec = R.chacon()
    t = R.build(spec, 3)
    ivs = sorted(t.level_interval(i) for i in range(t.height))
    assert all(b[0] >= a[1] for a, b in zip(ivs, ivs[1:]))
    assert sum(b - a for a, b in ivs) == t.mass


def test_infrankone_heights_follow_the_sequence():
    seq = S.factorials()
    spec = R.preset_infrankone(seq)
    assert [spec.height(m) for m in range(1, 9)] == seq.terms(8)
    assert [spec.s_of(m) for m in range(1, 7)] == [1, 1, 2, 3, 4, 5]
    for m in range(2, 7):
        q, sp = spec.stage(m)
        h, h1 = seq.term(m), seq.term(m + 1)
        # the spacer block is the least one exceeding a 1/m share of tau_{m+1}
        assert Fraction(sp[-1], h1) > Fraction(1, m)
        assert Fraction(sp[-1] - h, h1) <= Fraction(1, m)


def test_infrankone_on_fast_powers():
    seq = S.power_of_polynomial(2, [0, 0, 1])
    spec = R.preset_infrankone(seq)
    hs = [spec.height(m) for m in range(1, 6)]
    assert hs == [2 ** (m * m) for m in range(1, 6)]
    assert all(b // a == 2 ** (2 * m + 1) for m, (a, b) in enumerate(zip(hs, hs[1:]), 1))


def test_infrankone_rejects_bounded_ratios():
    with pytest.raises(ConstructionError):
        R.preset_infrankone(S.powers(2))


def _special_seq():
    vals = [1]
    for m in range(1, 14):
        vals.append((m + 2) * vals[-1] + (1 if m >= 3 else 0))
    return S.explicit(vals)


def test_specialinfrankone_concatenates_when_r_vanishes():
    spec = R.preset_specialinfrankone(_special_seq())
    q, sp = spec.stage(1)
    assert sp == (0,) * (q + 1)
    q, sp = spec.stage(4)
    assert sp[q // 3] == 1 and sum(sp) == 1
    seq = _special_seq()
    assert [spec.height(m) for m in range(1, 10)] == seq.terms(9)


def test_nonrecurrent_periodic_toy_keeps_everything():
    cyc = R.CyclicSystem(12)
    A = cyc.cylinder(0, 4)
    res = R.nonrecurrent_set_from_rigidity(cyc, A, S.explicit([12 * k for k in range(1, 30)]))
    assert np.array_equal(res.C, cyc.shift(A, 1))
    assert res.p_C == res.p_A == Fraction(1, 4)


def test_nonrecurrent_rejects_bad_sets():
    cyc = R.CyclicSystem(6)
    with pytest.raises(ConstructionError):
        R.nonrecurrent_set_from_rigidity(cyc, cyc.empty(), S.powers(2))
    with pytest.raises(ConstructionError):
        R.nonrecurrent_set_from_rigidity(cyc, cyc.cylinder(0, 1), S.powers(2))


def test_budgets():
    with pytest.raises(ResourceError):
        R.build(R.chacon(), 20)
    with pytest.raises(ResourceError):
        R.chacon_word(20)
    with pytest.raises(ValueError):
        R.chacon_nonrecurrence_check(2, 2)


def test_from_spec():
    assert R.from_spec("chacon").label == "chacon"
    spec = R.from_spec({"stages": [[2, [0, 1, 0]]], "h1": 1})
    assert [spec.height(m) for m in range(1, 4)] == [1, 3, 7]


@pytest.mark.parametrize("m", range(2, 6))
def test_infrankone_rigidity_is_attained_with_equality(m):
    # the non-strict form of the bound, which the factorial preset meets exactly
    spec = R.preset_infrankone(S.factorials())
    h, s = spec.height(m), spec.s_of(m)
    for level in range(h):
        br = R.delta_mass(spec, m, [level], h, tol=Fraction(1, 10**9))
        assert br.minus_lower == br.minus_upper == br.mu_E / s
