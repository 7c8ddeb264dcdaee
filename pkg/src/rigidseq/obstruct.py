"""Finite tests for the known obstructions to being a rigidity sequence.

None of these prove that a sequence *is* a rigidity sequence; they either
produce an exact witness (a linear form that is a non-zero constant along
the sequence, a recurring small gap) or report numerical evidence.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath

from ._exact import bit_length, dist_to_int, mod1_ratio
from .contfrac import ContinuedFraction
from .errors import PrecisionError, ResourceError
from .sequences import IntSequence, gap_divergence  # noqa: F401  (re-exported)


@dataclass(frozen=True)
class LinearFormWitness:
    """c_1 n_m + ... + c_K n_{m+K-1} = d for every m in the verified window."""

    coefficients: tuple[int, ...]
    constant: int
    window_start: int
    window_len: int

    def evaluate(self, seq: IntSequence, m: int) -> int:
        ts = seq.terms(len(self.coefficients), start=m)
        return sum(c * t for c, t in zip(self.coefficients, ts))

    def verify(self, seq: IntSequence, start: int | None = None, count: int | None = None) -> bool:
        """Re-check the form at ``count`` positions beginning at ``start``.

        Defaults to the 2W positions right after the original window.  Only
        positions whose terms exist are checked.
        """
        start = self.window_start + self.window_len if start is None else start
        count = 2 * self.window_len if count is None else count
        K = len(self.coefficients)
        avail = seq.available(start + count + K - 1)
        checked = 0
        for m in range(start, start + count):
            if m + K - 1 > avail:
                break
            if self.evaluate(seq, m) != self.constant:
                return False
            checked += 1
        return checked > 0 or avail < start


def _vectors(K: int, level: int):
    """Coefficient vectors with max |c| == level and non-zero end coefficients, lexicographic."""
    rng = range(-level, level + 1)
    for vec in itertools.product(rng, repeat=K):
        if vec[0] == 0 or vec[-1] == 0:
            continue
        if max(abs(c) for c in vec) != level:
            continue
        yield vec


def differencing_obstruction(seq: IntSequence, K_max: int = 4, C_max: int = 8,
                             M: int = 1, W: int = 16,
                             budget: int = 5_000_000) -> LinearFormWitness | None:
    """Search for a linear form that is a non-zero constant along the sequence.

    Vectors are tried by increasing length K, then increasing max |c_k|,
    then lexicographically; the first vector whose form is constant and
    non-zero at the W consecutive positions M..M+W-1 wins.  The returned
    witness is sign-normalized so that d > 0.  Returns None when nothing in
    the budget qualifies.
    """
    if K_max > 6 or C_max > 16:
        raise ValueError("search budget is limited to K_max <= 6, C_max <= 16")
    if W < 8:
        raise ValueError("window W must be at least 8")
    K_max = max(1, K_max)
    ts = seq.terms(W + K_max - 1, start=M)
    tried = 0
    for K in range(1, K_max + 1):
        if len(ts) < W + K - 1:
            break
        cols = [ts[i:i + W] for i in range(K)]  # cols[k][j] = n_{M+j+k}
        for level in range(1, C_max + 1):
            for vec in _vectors(K, level):
                tried += 1
                if tried > budget:
                    raise ResourceError(
                        "differencing search budget exhausted",
                        partial={"K": K, "level": level, "tried": tried - 1},
                    )
                d = sum(c * col[0] for c, col in zip(vec, cols))
                if d == 0:
                    continue
                if all(sum(c * col[j] for c, col in zip(vec, cols)) == d for j in range(1, W)):
                    if d < 0:
                        vec, d = tuple(-c for c in vec), -d
                    return LinearFormWitness(tuple(vec), d, M, W)
    return None


def doubling_residue(seq: IntSequence, count: int) -> list[int]:
    """n_{m+1} - 2 n_m for m = 1..count, for inspecting perturbed powers of 2."""
    ts = seq.terms(count + 1)
    return [b - 2 * a for a, b in zip(ts, ts[1:])]


@dataclass
class WeylProfile:
    """Averages (1/M) sum_{m<=M} exp(2 pi i n_m x) at sample points x."""

    points: list[Fraction]
    horizon: int
    averages: list[complex]
    threshold: float
    equidistribution_evidence: bool


def _required_bits(seq: IntSequence, M: int) -> int:
    return bit_length(seq.term(M)) + 64


def _mpf_fraction(x) -> Fraction:
    man, exp = x.man_exp
    man, exp = int(man), int(exp)
    return Fraction(man) * 2**exp if exp >= 0 else Fraction(man, 1 << -exp)


def _as_exact_point(x, need: int) -> Fraction:
    if isinstance(x, Fraction | int):
        return Fraction(x)
    if isinstance(x, mpmath.mpf):
        if x.context.prec < need:
            raise PrecisionError(
                f"sample point carries {x.context.prec} bits; {need} bits are required",
                required_bits=need,
            )
        return _mpf_fraction(x)
    if isinstance(x, float):
        if 53 < need:
            raise PrecisionError(f"float sample point has 53 bits; {need} required", required_bits=need)
        return Fraction(x)
    return Fraction(x)


def weyl_profile(seq: IntSequence, sample_count: int = 16, rng_seed: int = 0, M: int = 1024,
                 points: Sequence | None = None, threshold: float = 0.1,
                 prec: int = 64) -> WeylProfile:
    """Exponential-sum averages at pseudo-random (or given) points.

    Random points are dyadic rationals with bits(n_M) + 64 fractional bits,
    so n_m x mod 1 is computed exactly and only the final exponential is
    rounded.
    """
    if M < 1:
        raise ValueError("horizon M must be >= 1")
    M = seq.available(M)
    need = _required_bits(seq, M)
    if points is None:
        rng = random.Random(rng_seed)
        xs = [Fraction(rng.getrandbits(need), 1 << need) for _ in range(sample_count)]
    else:
        xs = [_as_exact_point(x, need) for x in points]
    ts = seq.terms(M)
    averages = []
    with mpmath.workprec(prec):
        for x in xs:
            re = mpmath.mpf(0)
            im = mpmath.mpf(0)
            for t in ts:
                ph = mod1_ratio(t, x)
                arg = mpmath.mpf(2 * ph.numerator) / ph.denominator
                re += mpmath.cospi(arg)
                im += mpmath.sinpi(arg)
            averages.append(complex(re / M, im / M))
    evidence = all(abs(a) < threshold for a in averages)
    return WeylProfile(xs, M, averages, threshold, evidence)


@dataclass
class NormSum:
    """Bracket [lower, upper] for sum_{m<=M} ||n_m x||."""

    horizon: int
    lower: Fraction
    upper: Fraction

    @property
    def value(self) -> Fraction:
        return (self.lower + self.upper) / 2

    @property
    def error(self) -> Fraction:
        return (self.upper - self.lower) / 2


def abs_norm_partial_sum(seq: IntSequence, x, M: int, bits: int = 64) -> NormSum:
    """Sum of ||n_m x|| for m <= M with a certified error bracket.

    ``x`` may be an exact rational (exact result), a ContinuedFraction (each
    term bracketed to 2**-bits through a deep convergent) or an mpf carrying
    at least bits(n_M) + bits bits of precision.
    """
    M = seq.available(M)
    ts = seq.terms(M)
    if isinstance(x, ContinuedFraction):
        lo = hi = Fraction(0)
        for t in ts:
            a, b = x.norm_interval(t, bits)
            lo += a
            hi += b
        return NormSum(M, lo, hi)
    if isinstance(x, mpmath.mpf):
        need = bit_length(ts[-1]) + bits
        if x.context.prec < need:
            raise PrecisionError(f"x carries {x.context.prec} bits; {need} are required",
                                 required_bits=need)
        xr = _mpf_fraction(x)
        ulp = Fraction(1, 1 << x.context.prec)
        total = sum((dist_to_int(mod1_ratio(t, xr)) for t in ts), Fraction(0))
        slack = sum((t * ulp for t in ts), Fraction(0))
        return NormSum(M, max(Fraction(0), total - slack), total + slack)
    xr = Fraction(x)
    total = sum((dist_to_int(mod1_ratio(t, xr)) for t in ts), Fraction(0))
    return NormSum(M, total, total)


@dataclass
class SumsetProbe:
    """Share of [-N, N] covered by c_1 A + ... + c_L A."""

    coefficients: tuple[int, ...]
    N: int
    count: int
    contains_zero: bool
    term_bound: int

    @property
    def density(self) -> Fraction:
        return Fraction(self.count, 2 * self.N + 1)

    @property
    def nonzero_density(self) -> Fraction:
        return Fraction(self.count - int(self.contains_zero), 2 * self.N + 1)


def sumset_density_probe(seq: IntSequence, coefficients: Sequence[int], N: int,
                         term_bound: int | None = None, budget: int = 10_000_000) -> SumsetProbe:
    """Enumerate c_1 a_1 + ... + c_L a_L within [-N, N] over terms a_i <= term_bound.

    With coefficients of one sign only terms up to N / min|c| can contribute.
    Mixed signs admit large terms (differences of squares), so the default
    bound there is N**2.
    """
    cs = tuple(int(c) for c in coefficients)
    if not 1 <= len(cs) <= 3 or any(c == 0 for c in cs):
        raise ValueError("need 1 to 3 non-zero coefficients")
    if term_bound is None:
        same_sign = all(c > 0 for c in cs) or all(c < 0 for c in cs)
        term_bound = N // min(abs(c) for c in cs) if same_sign else N * N
    terms = list(seq.iter_upto(term_bound))
    work = len(terms) ** len(cs)
    if work > budget:
        raise ResourceError(f"sumset probe needs {work} evaluations (budget {budget})")
    values = set()
    for combo in itertools.product(terms, repeat=len(cs)):
        s = sum(c * a for c, a in zip(cs, combo))
        if -N <= s <= N:
            values.add(s)
    return SumsetProbe(cs, N, len(values), 0 in values, term_bound)
