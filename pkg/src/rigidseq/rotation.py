"""Rigidity sequences for an irrational rotation x -> x + alpha.

The rotation by alpha is rigid along (n_m) exactly when ||n_m alpha|| -> 0,
so both constructions below pick integers whose multiples of alpha land in
shrinking arcs around 0, organised so as to control either the density of
the resulting sequence or its growth.

Decisions about ||n alpha|| against a rational threshold are certified:
a float prefilter handles the clear cases and everything near the
threshold is settled with exact convergent brackets.  Counting over huge
ranges uses exact floor sums over a rational enclosure of alpha.
"""
from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil
from typing import Callable

import mpmath
import numpy as np

from .contfrac import ContinuedFraction
from .errors import ConstructionError, InvariantViolation, PrecisionError, ResourceError
from .sequences import IntSequence

_CHUNK = 1 << 16


def as_cf(alpha) -> ContinuedFraction:
    if isinstance(alpha, ContinuedFraction):
        return alpha
    if isinstance(alpha, mpmath.mpf):
        man, exp = alpha.man_exp
        x = Fraction(man) * 2**exp if exp >= 0 else Fraction(man, 1 << -exp)
        ulp = Fraction(1, 1 << alpha.context.prec)
        return ContinuedFraction.from_interval(x - ulp, x + ulp, label=str(alpha))
    return ContinuedFraction.from_spec(alpha)


def convergents(alpha, n: int) -> tuple[int, int]:
    """(p_n, q_n)."""
    return as_cf(alpha).convergent(n)


# -- certified threshold tests -------------------------------------------------
def below(alpha: ContinuedFraction, n: int, t: Fraction, strict: bool = True) -> bool:
    """||n alpha|| < t (or <= t), decided exactly."""
    bits = 64
    while bits <= 1 << 14:
        lo, hi = alpha.norm_interval(n, bits)
        if (hi < t) if strict else (hi <= t):
            return True
        if (lo >= t) if strict else (lo > t):
            return False
        bits *= 2
    raise PrecisionError(f"cannot separate ||{n} alpha|| from {t}", required_bits=bits)


def hits(alpha: ContinuedFraction, lo: int, hi: int, t: Fraction, strict: bool = True) -> list[int]:
    """All n in [lo, hi] with ||n alpha|| < t (or <= t), ascending."""
    p, q, _ = alpha.approximation(max(1, hi), 64)
    af = p / q
    tf = float(t)
    out: list[int] = []
    start = lo
    while start <= hi:
        stop = min(hi, start + _CHUNK - 1)
        ns = np.arange(start, stop + 1, dtype=np.float64)
        x = ns * af
        d = np.abs(x - np.rint(x))
        # n * af carries at most ~n 2^-52 error against n alpha
        margin = ns * 2.0**-50 + 2.0**-50
        sure = d < tf - margin
        maybe = np.abs(d - tf) <= margin
        for i in np.nonzero(sure | maybe)[0]:
            n = start + int(i)
            if sure[i] or below(alpha, n, t, strict):
                out.append(n)
        start = stop + 1
    return out


# -- exact counting ------------------------------------------------------------
def floor_sum(n: int, m: int, a: int, b: int) -> int:
    """sum_{i=0}^{n-1} floor((a i + b) / m) for m > 0, any integers a, b."""
    if n <= 0:
        return 0
    ans = 0
    if a < 0 or a >= m:
        ans += n * (n - 1) // 2 * (a // m)
        a %= m
    if b < 0 or b >= m:
        ans += n * (b // m)
        b %= m
    while True:
        if a >= m:
            ans += n * (n - 1) // 2 * (a // m)
            a %= m
        if b >= m:
            ans += n * (b // m)
            b %= m
        y = a * n + b
        if y < m:
            return ans
        n, b, m, a = y // m, y % m, a, m


def _sum_floor_linear(lo: int, hi: int, x: Fraction, c: Fraction) -> int:
    """sum_{n=lo+1}^{hi} floor(n x + c)."""
    N = hi - lo
    den = x.denominator * c.denominator
    a = x.numerator * c.denominator
    b = (lo + 1) * a + c.numerator * x.denominator
    return floor_sum(N, den, a, b)


def count_hits(alpha: ContinuedFraction, lo: int, hi: int, t: Fraction) -> int:
    """#{n in (lo, hi] : ||n alpha|| <= t}, exact."""
    if hi <= lo:
        return 0
    if t <= 0:
        raise ValueError("threshold must be positive")
    if t >= Fraction(1, 2):
        return hi - lo
    # enclosure width times hi must be far below the share of n near the arc ends
    bits = hi.bit_length() + 64
    while bits <= 1 << 16:
        k = alpha._index_for(hi, bits)
        A, B = alpha.enclosure(k)
        N = hi - lo
        # integers in [nB - t, nA + t] (fully inside) vs [nA - t, nB + t] (touching)
        inner = (_sum_floor_linear(lo, hi, A, t) + _sum_floor_linear(lo, hi, -B, t) + N)
        outer = (_sum_floor_linear(lo, hi, B, t) + _sum_floor_linear(lo, hi, -A, t) + N)
        if inner == outer:
            return inner
        bits *= 2
    raise PrecisionError("hit count did not stabilise", required_bits=bits)


# -- density schedules ------------------------------------------------------------
@contextmanager
def _iv_prec(prec: int):
    old = mpmath.iv.prec
    mpmath.iv.prec = prec
    try:
        yield
    finally:
        mpmath.iv.prec = old


def _raw_fraction(raw) -> Fraction:
    """Exact value of an mpmath raw mpf tuple (finite values only)."""
    sign, man, exp, _ = raw
    v = Fraction(int(man)) * 2**exp if exp >= 0 else Fraction(int(man), 1 << -exp)
    return -v if sign else v


class LogSchedule:
    """d_N = 1 / log(N + 2)."""

    label = "1/log(N+2)"

    def value(self, N: int):
        return 1 / mpmath.log(N + 2)

    def threshold(self, eps: Fraction) -> int:
        """Least N >= 1 with d_N <= eps (then d_N <= eps for all larger N)."""
        x = 1 / Fraction(eps)
        prec = int(float(x) * 1.45) + 80
        while True:
            with _iv_prec(prec):
                e = mpmath.iv.exp(mpmath.iv.mpf(x.numerator) / x.denominator)
                lo, hi = (ceil(_raw_fraction(r)) for r in e._mpi_)
            if lo == hi:
                return max(1, lo - 2)
            prec *= 2

    def exceeded_by(self, D: Fraction, N: int) -> bool:
        """D > d_N, certified: log(N + 2) > 1/D."""
        if D <= 0:
            return False
        inv = 1 / Fraction(D)
        prec = max(N.bit_length(), 64) + 64
        for _ in range(6):
            with _iv_prec(prec):
                lo, hi = (_raw_fraction(r) for r in mpmath.iv.log(mpmath.iv.mpf(N + 2))._mpi_)
            if lo > inv:
                return True
            if hi < inv:
                return False
            prec *= 2
        raise PrecisionError("density comparison is too close to call", required_bits=prec)


class RationalSchedule:
    """Non-increasing rational rule N -> d_N."""

    def __init__(self, rule: Callable[[int], Fraction], label: str = "custom"):
        self.rule = rule
        self.label = label

    def value(self, N: int):
        return Fraction(self.rule(N))

    def threshold(self, eps: Fraction) -> int:
        if self.value(1) <= eps:
            return 1
        hi = 2
        while self.value(hi) > eps:
            hi *= 2
            if hi > 1 << 4096:
                raise ResourceError("schedule does not reach the threshold")
        lo = hi // 2
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self.value(mid) <= eps:
                hi = mid
            else:
                lo = mid
        return hi

    def exceeded_by(self, D: Fraction, N: int) -> bool:
        return D > self.value(N)


@dataclass
class Checkpoint:
    k: int
    arc: Fraction          # hits satisfy ||n alpha|| <= arc
    N_k: int
    M_k: int
    hits: int              # #{n <= M_k : ||n alpha|| <= arc}
    union_count: int       # #(sequence n [1, M_k])

    @property
    def density(self) -> Fraction:
        return Fraction(self.union_count, self.M_k)


@dataclass
class SlowSequence:
    alpha: ContinuedFraction
    checkpoints: list[Checkpoint]
    sequence: IntSequence
    schedule: object = None

    def verify(self) -> bool:
        """D(M_k) >= 2^-k and D(M_k) > d_{M_k} at every checkpoint."""
        return all(c.density >= c.arc and self.schedule.exceeded_by(c.density, c.M_k)
                   for c in self.checkpoints)


def slow_rigidity_sequence(alpha, d_schedule=None, K_max: int = 6,
                           search: int = 4096) -> SlowSequence:
    """Union over k of {n <= M_k : ||n alpha|| <= 2^-k}.

    N_k is the first index from which d_N <= 4^-k; M_k is the least
    M >= max(N_k, M_{k-1} + 1) where the k-th arc is hit at least M/2^k
    times and the union has density above d_M.  Counting is exact, so
    M_k may be astronomically large.
    """
    cf = as_cf(alpha)
    sched = d_schedule if d_schedule is not None else LogSchedule()
    cps: list[Checkpoint] = []
    prev_M = 0
    base_count = 0  # union count on [1, prev_M]
    for k in range(1, K_max + 1):
        arc = Fraction(1, 2**k)
        Nk = sched.threshold(Fraction(1, 4**k))
        M = max(Nk, prev_M + 1)
        for _ in range(search):
            own = count_hits(cf, 0, M, arc)
            new = count_hits(cf, prev_M, M, arc)
            union = base_count + new
            if own * 2**k >= M and sched.exceeded_by(Fraction(union, M), M):
                break
            M += 1
        else:
            raise ResourceError(f"no admissible M_{k} within {search} candidates", partial=cps)
        cps.append(Checkpoint(k, arc, Nk, M, own, union))
        base_count = union
        prev_M = M

    bounds = [(c.M_k, c.arc) for c in cps]

    def gen():
        lo = 1
        for M, t in bounds:
            n = lo
            while n <= M:
                top = min(M, n + _CHUNK - 1)
                yield from hits(cf, n, top, t, strict=False)
                n = top + 1
            lo = M + 1

    seq = IntSequence("rotation_hits", {"alpha": cf.to_spec(), "K_max": K_max},
                      None, length=base_count, stream=gen)
    return SlowSequence(cf, cps, seq, sched)


# -- syndeticity ------------------------------------------------------------------
@dataclass
class SyndeticCertificate:
    """Every window [M+1, M+N] contains n with ||n alpha|| < eps/2."""

    eps: Fraction
    N: int
    method: str
    horizon: int
    q_k: int
    N_upper: int
    returns: list[int] = field(default_factory=list, repr=False)


def _max_gap(rets: list[int]) -> int:
    return max(b - a for a, b in zip(rets, rets[1:]))


def syndeticity_constant(alpha, eps, cycles: int = 4) -> SyndeticCertificate:
    """Largest gap between returns of n alpha to the arc ||x|| < eps/2.

    Finds the first q_k with ||q_k alpha|| < eps/4 and scans ``cycles``
    return cycles of length q_k + q_{k+1}, counting the stretch from 0 to
    the first return.  ``N_upper`` is an independent bound: the points
    n alpha for any q_k + q_{k+1} consecutive n leave no circular gap of
    length eps, checked exactly.
    """
    cf = as_cf(alpha)
    eps = Fraction(eps)
    if not 0 < eps <= Fraction(1, 2):
        raise ValueError("eps must lie in (0, 1/2]")
    half = eps / 2
    k = 0
    while not below(cf, cf.convergent(k)[1], eps / 4):
        k += 1
    qk, qk1 = cf.convergent(k)[1], cf.convergent(k + 1)[1]
    cycle = qk + qk1
    horizon = cycles * cycle
    rets = [0] + hits(cf, 1, horizon, half)
    if len(rets) < 2:
        raise InvariantViolation("no return to the arc within the scanned cycles")
    N = _max_gap(rets)
    N_upper = _window_bound(cf, cycle, eps)
    # brute recheck over 10 N further windows
    tail_end = horizon + 10 * N
    more = [rets[-1]] + hits(cf, horizon + 1, tail_end + N, half)
    if _max_gap(more) > N:
        raise InvariantViolation("return gap grew beyond the scanned cycles")
    return SyndeticCertificate(eps, N, "scan-with-three-distance-cycle", tail_end, qk, N_upper, rets)


def _window_bound(cf: ContinuedFraction, W: int, eps: Fraction) -> int:
    """W if the points n alpha, 1 <= n <= W, have every circular gap < eps."""
    p, q, _ = cf.approximation(W, 64)
    pts = sorted(Fraction((n * p) % q, q) for n in range(1, W + 1))
    err = Fraction(1, 1 << 63)
    gaps = [b - a for a, b in zip(pts, pts[1:])] + [1 - pts[-1] + pts[0]]
    if max(gaps) + err >= eps:
        raise InvariantViolation("window bound failed; alpha enclosure too coarse")
    return W


# -- bounded growth ---------------------------------------------------------------
@dataclass
class GrowthSequence:
    alpha: ContinuedFraction
    C: int
    N: dict[int, int]           # syndeticity constants N_s
    K: dict[int, int]           # block counts K_L
    terms: list[int]
    levels: list[int]           # selection level L of each term
    blocks: list[tuple[int, int]]
    complete: bool              # False when stopped by max_terms
    psi: Callable[[int], int] = field(repr=False, default=None)

    def sequence(self) -> IntSequence:
        from .sequences import explicit
        return explicit(self.terms)

    def verify(self) -> bool:
        """n_m <= C Psi(m) for every emitted m, exactly."""
        return all(n <= self.C * self.psi(m) for m, n in enumerate(self.terms, start=1))


def theta_minorant(psi: Callable[[int], int], horizon: int) -> list[Fraction]:
    """theta[m] = min_{m <= j <= horizon} Psi(j)/j (index 0 unused)."""
    th = [Fraction(0)] * (horizon + 1)
    cur = None
    for j in range(horizon, 0, -1):
        v = Fraction(int(psi(j)), j)
        cur = v if cur is None or v < cur else cur
        th[j] = cur
    return th


def bounded_growth_rigidity_sequence(alpha, psi: Callable[[int], int], L_max: int = 4,
                                     horizon: int = 1 << 20, max_terms: int = 1000) -> GrowthSequence:
    """Blocks B(L, j) of length N_L, one arc hit chosen in each.

    eps_s = 2^-s, N_s from ``syndeticity_constant``, C = N_1 and K_L the
    least K > K_{L-1} with theta(K) >= N_{L+1}.  Emission stops after
    ``max_terms`` terms or after level L_max.
    """
    cf = as_cf(alpha)
    for m in (1, 2, 3):
        if int(psi(m)) < m:
            raise ConstructionError("Psi(m) >= m is required")
    th = theta_minorant(psi, horizon)
    if not th[horizon // 2] > th[1] + 1:
        raise ConstructionError("Psi(m)/m shows no growth over the horizon")
    Ns: dict[int, int] = {}

    def N_of(s):
        if s not in Ns:
            Ns[s] = syndeticity_constant(cf, Fraction(1, 2**s)).N
        return Ns[s]

    C = N_of(1)
    Ks: dict[int, int] = {}
    terms, levels, blocks = [], [], []
    offset = 0
    complete = True
    prevK = 0
    for L in range(1, L_max + 1):
        if len(terms) >= max_terms:
            complete = False
            break
        NL = N_of(L)
        target = N_of(L + 1)
        K = prevK + 1
        while K <= horizon and th[K] < target:
            K += 1
        # an unresolved K_L (beyond the horizon) still exceeds every block index we emit
        found = K <= horizon
        if found:
            Ks[L] = K
        t_half = Fraction(1, 2 ** (L + 1))
        j = 0
        while (j < K if found else True):
            if len(terms) >= max_terms:
                complete = False
                break
            lo = offset + j * NL + 1
            hi = offset + (j + 1) * NL
            hs = hits(cf, lo, hi, t_half)
            if not hs:
                raise InvariantViolation(f"block B({L},{j}) holds no arc hit")
            terms.append(hs[0])
            levels.append(L)
            blocks.append((lo, hi))
            j += 1
        if not complete:
            break
        offset += K * NL
        prevK = K
    return GrowthSequence(cf, C, Ns, Ks, terms, levels, blocks, complete, psi)
