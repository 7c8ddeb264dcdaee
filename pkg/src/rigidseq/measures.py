"""Probability measures on the circle with computable Fourier coefficients.

Points of the circle are written as x in [0, 1) (standing for e^{2 pi i x})
and the transform is nu^(n) = integral of e^{-2 pi i n x} d nu(x).  Angles
are kept as exact rationals wherever possible so that n x mod 1 is exact
and only the last trigonometric step rounds.

Four families are provided:

* ``Atomic``       finitely many point masses,
* ``RieszFactors`` infinite convolution of three-point measures
                   (a^2+b^2) delta_0 + ab delta_{x_k} + ab delta_{-x_k},
* ``OdometerBlock`` product measure on mixed-radix digits, block by block,
* ``CantorArc``    uniform measure on a nested system of short arcs around
                   roots of unity.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import mpmath

from ._exact import as_fraction, bit_length, dist_to_int, frac_part, mod1_ratio
from .errors import ConstructionError, PrecisionError, ResourceError
from .sequences import IntSequence

DEFAULT_PREC = 128


@dataclass(frozen=True)
class FourierValue:
    """nu^(n) together with a certified bracket for its real part."""

    n: int
    value: complex
    lower: mpmath.mpf
    upper: mpmath.mpf

    @property
    def width(self):
        return self.upper - self.lower


@dataclass(frozen=True)
class GapEntry:
    """1 - Re nu^(n_m), bracketed."""

    m: int
    n: int
    lower: mpmath.mpf
    upper: mpmath.mpf


def _expi(ph: Fraction) -> tuple[mpmath.mpf, mpmath.mpf]:
    """(cos, sin) of -2 pi ph, exact at multiples of 1/4."""
    arg = mpmath.mpf(-2 * ph.numerator) / ph.denominator
    return mpmath.cospi(arg), mpmath.sinpi(arg)


def _sinpi(x: Fraction):
    """sin(pi x) with the argument reduced exactly first, so that small
    values keep their relative precision."""
    r = x - 2 * math.floor((x + 1) / 2)          # (-1, 1]
    if r > Fraction(1, 2):
        r = 1 - r
    elif r < Fraction(-1, 2):
        r = -1 - r
    return mpmath.sinpi(mpmath.mpf(r.numerator) / r.denominator)


def _cospi(x: Fraction):
    return _sinpi(x + Fraction(1, 2))


def _slack(terms: int, prec: int):
    return mpmath.mpf(terms + 1) * mpmath.mpf(2) ** (8 - prec)


def _check_angle(x, n: int) -> Fraction:
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, mpmath.mpf):
        need = bit_length(abs(n)) + 64
        if x.context.prec < need:
            raise PrecisionError(f"angle carries {x.context.prec} bits, {need} needed", required_bits=need)
        man, exp = int(x.man_exp[0]), int(x.man_exp[1])
        return Fraction(man) * 2**exp if exp >= 0 else Fraction(man, 1 << -exp)
    raise TypeError(f"unsupported angle type {type(x).__name__}")


class CircleMeasure:
    """Common interface; subclasses implement ``fourier`` and ``sample``."""

    kind = "abstract"

    def fourier(self, n: int, K: int | None = None, prec: int = DEFAULT_PREC) -> FourierValue:
        raise NotImplementedError

    def sample(self, count: int, rng_seed: int = 0) -> list[Fraction]:
        raise NotImplementedError

    def abs2(self, n: int, K: int | None = None) -> float:
        """|nu^(n)|^2 as a float (diagnostics only)."""
        return abs(self.fourier(n, K, prec=64).value) ** 2

    def to_spec(self) -> dict:
        raise NotImplementedError


# ---------------------------------------------------------------------------
class Atomic(CircleMeasure):
    kind = "atomic"

    def __init__(self, atoms: Sequence[tuple]):
        merged: dict[Fraction, Fraction] = {}
        for angle, mass in atoms:
            a = frac_part(as_fraction(angle))
            w = as_fraction(mass)
            if w < 0:
                raise ConstructionError("atom masses must be non-negative")
            merged[a] = merged.get(a, Fraction(0)) + w
        if sum(merged.values()) != 1:
            raise ConstructionError("atom masses must sum to 1")
        self.atoms = sorted((a, w) for a, w in merged.items() if w)

    @classmethod
    def dirac(cls, angle=0) -> "Atomic":
        return cls([(angle, 1)])

    def fourier(self, n: int, K=None, prec: int = DEFAULT_PREC) -> FourierValue:
        n = int(n)
        with mpmath.workprec(prec):
            re = im = mpmath.mpf(0)
            for a, w in self.atoms:
                c, s = _expi(mod1_ratio(n, a))
                re += w.numerator * c / w.denominator
                im += w.numerator * s / w.denominator
            sl = _slack(len(self.atoms), prec)
            return FourierValue(n, complex(re, im), re - sl, re + sl)

    def adjoint(self) -> "Atomic":
        """nu*(E) = conj nu(-E): reflect every angle."""
        return Atomic([(-a, w) for a, w in self.atoms])

    def convolve(self, other: "Atomic") -> "Atomic":
        return Atomic([(a + b, v * w) for a, v in self.atoms for b, w in other.atoms])

    def symmetrize(self) -> "Atomic":
        """nu * nu*, whose transform is |nu^|^2."""
        return self.convolve(self.adjoint())

    def mass_squares(self) -> Fraction:
        return sum((w * w for _, w in self.atoms), Fraction(0))

    def sample(self, count: int, rng_seed: int = 0) -> list[Fraction]:
        rng = random.Random(rng_seed)
        den = math.lcm(*(w.denominator for _, w in self.atoms))
        cum, acc = [], 0
        for a, w in self.atoms:
            acc += w.numerator * (den // w.denominator)
            cum.append(acc)
        out = []
        for _ in range(count):
            u = rng.randrange(den)
            lo, hi = 0, len(cum) - 1
            while lo < hi:
                mid = (lo + hi) // 2
                if cum[mid] > u:
                    hi = mid
                else:
                    lo = mid + 1
            out.append(self.atoms[lo][0])
        return out

    def abs2(self, n: int, K=None) -> float:
        re = im = 0.0
        for a, w in self.atoms:
            ph = mod1_ratio(n, a)
            t = 2 * math.pi * ph.numerator / ph.denominator
            re += float(w) * math.cos(t)
            im -= float(w) * math.sin(t)
        return re * re + im * im

    def to_spec(self) -> dict:
        return {"kind": "atomic", "atoms": [[str(a), str(w)] for a, w in self.atoms]}


# ---------------------------------------------------------------------------
class RieszFactors(CircleMeasure):
    """nu = conv_k [(a_k^2+b_k^2) delta_0 + a_k b_k (delta_{x_k} + delta_{-x_k})].

    ``x_rule(k)`` and ``b_rule(k)`` give the k-th angle and weight (k >= 1),
    with a_k = 1 - b_k.  ``certificate = (C, r)`` asserts |x_k| <= C r^k
    and enables the certified tail bound.
    """

    kind = "riesz"

    def __init__(self, x_rule: Callable[[int], Fraction], b_rule: Callable[[int], Fraction],
                 certificate: tuple[Fraction, Fraction] | None = None, label: str = "custom",
                 params: dict | None = None):
        self._x = x_rule
        self._b = b_rule
        self.certificate = certificate
        self.label = label
        self.params = params or {}
        self._cache: dict[int, tuple[Fraction, Fraction, Fraction]] = {}

    @classmethod
    def dyadic(cls, b_rule: Callable[[int], Fraction] | None = None, label: str = "dyadic") -> "RieszFactors":
        """x_k = 2^-k; default weights b_k = 1/(k+1)."""
        if b_rule is None:
            b_rule = lambda k: Fraction(1, k + 1)  # noqa: E731
        return cls(lambda k: Fraction(1, 1 << k), b_rule, (Fraction(1), Fraction(1, 2)), label)

    @classmethod
    def constant_weight(cls, b, base: int = 2) -> "RieszFactors":
        b = as_fraction(b)
        return cls(lambda k: Fraction(1, base**k), lambda k: b,
                   (Fraction(1), Fraction(1, base)), f"const-{b}", {"b": str(b), "base": base})

    def factor(self, k: int) -> tuple[Fraction, Fraction, Fraction]:
        """(x_k, a_k, b_k)."""
        if k < 1:
            raise IndexError("factors start at k = 1")
        got = self._cache.get(k)
        if got is None:
            x = Fraction(self._x(k))
            b = Fraction(self._b(k))
            if not 0 < b <= Fraction(1, 2):
                raise ConstructionError(f"b_{k} = {b} is outside (0, 1/2]")
            got = (x, 1 - b, b)
            self._cache[k] = got
        return got

    def atom_bound(self, K: int) -> Fraction:
        """3 prod_{k<=K} (a_k^2 + b_k^2): bounds every point mass of nu."""
        if K < 1:
            raise ValueError("K must be >= 1")
        out = Fraction(3)
        for k in range(1, K + 1):
            _, a, b = self.factor(k)
            out *= a * a + b * b
        return out

    def tail_sum(self, n: int, K: int) -> mpmath.mpf | None:
        """Upper bound on sum_{k>K} pi^2 n^2 x_k^2, or None without a certificate."""
        if self.certificate is None:
            return None
        C, r = self.certificate
        geo = C * C * r ** (2 * (K + 1)) / (1 - r * r)
        return mpmath.pi ** 2 * mpmath.mpf(n * n * geo.numerator) / geo.denominator

    def default_K(self, n: int, width: float = 1e-7) -> int:
        n = max(1, abs(int(n)))
        if self.certificate is None:
            return bit_length(n) + 64
        K = 1
        while self.tail_sum(n, K) >= width:
            K += 1
        return K

    def fourier(self, n: int, K: int | None = None, prec: int = DEFAULT_PREC) -> FourierValue:
        n = int(n)
        if K is None:
            K = self.default_K(n)
        if K < 1:
            raise ValueError("truncation K must be >= 1 for product measures")
        with mpmath.workprec(prec):
            prod = mpmath.mpf(1)
            for k in range(1, K + 1):
                x, a, b = self.factor(k)
                ph = mod1_ratio(n, x)
                if ph == 0:
                    continue
                # 1 - cos(2 pi ph) = 2 sin^2(pi ph), free of cancellation
                s = _sinpi(ph)
                prod *= 1 - 4 * mpmath.mpf((a * b).numerator) / (a * b).denominator * s * s
            sl = _slack(K, prec)
            if n == 0:
                lo = mpmath.mpf(1)
            else:
                tail = self.tail_sum(n, K)
                tail_lower = mpmath.mpf(0) if tail is None else max(mpmath.mpf(0), 1 - tail)
                lo = max(mpmath.mpf(0), prod * tail_lower - sl)
            return FourierValue(n, complex(prod), lo, min(mpmath.mpf(1), prod + sl))

    def abs2(self, n: int, K: int | None = None) -> float:
        if K is None:
            K = 40
        p = 1.0
        for k in range(1, K + 1):
            x, a, b = self.factor(k)
            ph = mod1_ratio(n, x)
            if ph:
                s = math.sin(math.pi * float(ph if ph <= Fraction(1, 2) else 1 - ph))
                p *= 1 - 4 * float(a * b) * s * s
        return p * p

    def sample(self, count: int, rng_seed: int = 0, K: int = 64) -> list[Fraction]:
        """Draws from the K-fold partial product (exact dyadic points for dyadic x_k)."""
        rng = random.Random(rng_seed)
        facs = [self.factor(k) for k in range(1, K + 1)]
        out = []
        for _ in range(count):
            x = Fraction(0)
            for xk, a, b in facs:
                ab = a * b
                den = ab.denominator * (a * a + b * b).denominator
                u = Fraction(rng.randrange(den), den)
                if u < ab:
                    x += xk
                elif u < 2 * ab:
                    x -= xk
            out.append(frac_part(x))
        return out

    def to_spec(self) -> dict:
        return {"kind": "riesz", "x": self.label, **self.params}


# ---------------------------------------------------------------------------
class OdometerBlock(CircleMeasure):
    """Digit-block product measure for a sequence with integer ratios.

    x = sum_m b_m / n_m with 0 <= b_m < a_m, a_1 = n_1, a_{m+1} = n_{m+1}/n_m.
    Digit indices are grouped into blocks I_k = [N_k + 1, N_{k+1}], k >= 0,
    N_0 = 0.  On each block the all-zero word has mass 1 - eps_k and the
    other words share eps_k uniformly.
    """

    kind = "block"

    def __init__(self, seq: IntSequence,
                 block_len: Callable[[int], int] = lambda k: k + 1,
                 eps: Callable[[int], Fraction] = lambda k: Fraction(1, k + 2),
                 guard: int = 64, check_blocks: int = 8):
        self.seq = seq
        self._len = block_len
        self._eps = eps
        self.guard = guard
        self._N = [0]
        for k in range(check_blocks):
            self.block(k)
        prev = 0
        for k in range(check_blocks):
            L = self._len(k)
            if L <= prev:
                raise ConstructionError("block lengths |I_k| must strictly increase")
            prev = L
            e = Fraction(self._eps(k))
            if not 0 < e <= Fraction(1, 2):
                raise ConstructionError(f"eps_{k} = {e} is outside (0, 1/2]")

    # -- digit structure ------------------------------------------------
    def radix(self, m: int) -> int:
        """a_m."""
        if m == 1:
            a = self.seq.term(1)
        else:
            hi, lo = self.seq.term(m), self.seq.term(m - 1)
            a, r = divmod(hi, lo)
            if r:
                raise ConstructionError(f"n_{m}/n_{m-1} is not an integer")
        if a < 2:
            raise ConstructionError(f"digit radix a_{m} = {a} must be at least 2")
        return a

    def N(self, k: int) -> int:
        while len(self._N) <= k:
            self._N.append(self._N[-1] + self._len(len(self._N) - 1))
        return self._N[k]

    def block(self, k: int) -> tuple[int, int]:
        """(first, last) digit index of I_k."""
        return self.N(k) + 1, self.N(k + 1)

    def eps(self, k: int) -> Fraction:
        return Fraction(self._eps(k))

    def k_of(self, M: int) -> int:
        """The unique k with M in I_k."""
        if M < 1:
            raise ValueError("M must be >= 1")
        k = 0
        while self.N(k + 1) < M:
            k += 1
        return k

    def block_size(self, k: int) -> int:
        lo, hi = self.block(k)
        return self.seq.term(hi) // (self.seq.term(lo - 1) if lo > 1 else 1)

    # -- block quantities -------------------------------------------------
    def nu_D(self, k: int) -> Fraction:
        """nu(D_k), D_k = {digits vanish on I_k and I_{k+1}}."""
        return (1 - self.eps(k)) * (1 - self.eps(k + 1))

    def norm_bound(self, M: int) -> Fraction:
        """2^{M+1} / 2^{N_{k(M)+2}}: bound on ||n_M x|| over D_{k(M)}."""
        e = M + 1 - self.N(self.k_of(M) + 2)
        return Fraction(2) ** e

    def norm_sup(self, M: int) -> Fraction:
        """Exact sup of ||n_M x|| over D_{k(M)} (telescoping digit sum)."""
        return Fraction(self.seq.term(M), self.seq.term(self.N(self.k_of(M) + 2)))

    def zero_point_mass(self, K: int) -> Fraction:
        """prod_{k<K} (1 - eps_k): mass of the all-zero cylinder over K blocks."""
        out = Fraction(1)
        for k in range(K):
            out *= 1 - self.eps(k)
        return out

    def eps_diagnostics(self, K: int) -> dict:
        s = sum((self.eps(k) for k in range(K)), Fraction(0))
        return {"partial_sum": s, "last": self.eps(K - 1),
                "decreasing": all(self.eps(k + 1) <= self.eps(k) for k in range(K - 1))}

    def in_D(self, k: int, x: Fraction) -> bool:
        lo, _ = self.block(k)
        _, hi = self.block(k + 1)
        digits = self.digits(x, hi)
        return all(d == 0 for d in digits[lo - 1:hi])

    def digits(self, x: Fraction, depth: int) -> list[int]:
        """b_1..b_depth of x."""
        x = frac_part(Fraction(x))
        out = []
        for m in range(1, depth + 1):
            x *= self.radix(m)
            d = x.numerator // x.denominator
            out.append(d)
            x -= d
        return out

    # -- Fourier -------------------------------------------------------------
    def fourier(self, n: int, K=None, prec: int = DEFAULT_PREC) -> FourierValue:
        n = int(n)
        if n == 0:
            return FourierValue(0, complex(1), mpmath.mpf(1), mpmath.mpf(1))
        an = abs(n)
        with mpmath.workprec(prec):
            re, im = mpmath.mpf(1), mpmath.mpf(0)
            k = 0
            terms = 0
            while True:
                lo, hi = self.block(k)
                n_before = self.seq.term(lo - 1) if lo > 1 else 1
                # digits at m >= lo move n x by at most |n| / n_{lo-1}
                if k > 0 and n_before > an << self.guard:
                    break
                gre, gim = mpmath.mpf(1), mpmath.mpf(0)
                for m in range(lo, hi + 1):
                    sre, sim = self._digit_sum(n, m)
                    gre, gim = gre * sre - gim * sim, gre * sim + gim * sre
                    terms += 1
                P = self.block_size(k)
                e = self.eps(k)
                w0 = (1 - e) - e / (P - 1)
                w1 = e / (P - 1)
                bre = mpmath.mpf(w0.numerator) / w0.denominator + w1.numerator * gre / w1.denominator
                bim = w1.numerator * gim / w1.denominator
                re, im = re * bre - im * bim, re * bim + im * bre
                k += 1
            tail = 2 * mpmath.pi * an / mpmath.mpf(n_before)
            sl = _slack(terms, prec) + tail
            return FourierValue(n, complex(re, im), re - sl, min(mpmath.mpf(1), re + sl))

    def _digit_sum(self, n: int, m: int):
        """sum_{b < a_m} e^{-2 pi i n b / n_m}."""
        a = self.radix(m)
        nm = self.seq.term(m)
        ph = Fraction(n % nm, nm)
        if ph == 0:
            return mpmath.mpf(a), mpmath.mpf(0)
        # (1 - w^a) / (1 - w) with w = e^{-2 pi i ph}
        #   = e^{-pi i (a-1) ph} sin(pi a ph) / sin(pi ph)
        ratio = _sinpi(a * ph) / _sinpi(ph)
        half = (a - 1) * ph
        return ratio * _cospi(half), -ratio * _sinpi(half)

    # -- sampling ------------------------------------------------------------
    def sample_depth(self, min_bits: int = 128) -> int:
        """Smallest block boundary N_k with n_{N_k} >= 2^min_bits."""
        k = 1
        while bit_length(self.seq.term(self.N(k))) <= min_bits:
            k += 1
        return self.N(k)

    def sample(self, count: int, rng_seed: int = 0, depth: int | None = None) -> list[Fraction]:
        """Exact points X / n_D drawn block by block."""
        D = self.sample_depth() if depth is None else depth
        nD = self.seq.term(D)
        blocks = []
        k = 0
        while self.N(k) < D:
            lo, hi = self.block(k)
            hi = min(hi, D)
            base = self.seq.term(lo - 1) if lo > 1 else 1
            P = self.seq.term(hi) // base
            e = self.eps(k)
            blocks.append((P, nD // self.seq.term(hi), e.numerator, e.denominator))
            k += 1
        rng = random.Random(rng_seed)
        out = []
        for _ in range(count):
            X = 0
            for P, scale, en, ed in blocks:
                if rng.randrange(ed) < en:
                    # the block word is read as one integer in [1, P)
                    X += rng.randrange(1, P) * scale
            out.append(Fraction(X, nD))
        return out

    def to_spec(self) -> dict:
        return {"kind": "block", "seq": self.seq.to_spec()}


def block_measure(seq: IntSequence, block_len: Callable[[int], int] | None = None,
                  eps: Callable[[int], Fraction] | None = None) -> OdometerBlock:
    kw = {}
    if block_len is not None:
        kw["block_len"] = block_len
    if eps is not None:
        kw["eps"] = eps
    return OdometerBlock(seq, **kw)


# ---------------------------------------------------------------------------
@dataclass
class ArcLevel:
    m: int
    n: int
    h: int
    centers: list[Fraction] = field(default_factory=list)

    @property
    def width(self) -> Fraction:
        return Fraction(1, self.n * self.h)


class CantorArc(CircleMeasure):
    """Uniform measure on nested arcs of width 1/(n_m h_m) around n_m-th roots of unity."""

    kind = "cantor"

    def __init__(self, seq: IntSequence, levels: list[ArcLevel], h_rule=None):
        self.seq = seq
        self.levels = levels
        self.h_rule = h_rule

    @property
    def start(self) -> int:
        return self.levels[0].m

    @property
    def leaves(self) -> ArcLevel:
        return self.levels[-1]

    def fourier_guarantee(self, m: int) -> Fraction:
        """Certified |1 - nu^(n_m)| <= pi/h_m, returned as the factor 1/h_m (times pi)."""
        return Fraction(1, self._h(m))

    def _h(self, m: int) -> int:
        for lv in self.levels:
            if lv.m == m:
                return lv.h
        raise IndexError(f"level {m} is not part of this arc system")

    def fourier(self, n: int, K=None, prec: int = DEFAULT_PREC) -> FourierValue:
        n = int(n)
        leaf = self.leaves
        W = leaf.width
        with mpmath.workprec(prec):
            # each leaf contributes e^{-2 pi i n c} sinc(pi n W)
            if n == 0:
                damp = mpmath.mpf(1)
            else:
                t = mpmath.pi * mpmath.mpf(n * W.numerator) / W.denominator
                damp = mpmath.sin(t) / t
            re = im = mpmath.mpf(0)
            for c in leaf.centers:
                cr, ci = _expi(mod1_ratio(n, c))
                re += cr
                im += ci
            cnt = len(leaf.centers)
            re, im = re * damp / cnt, im * damp / cnt
            sl = _slack(cnt, prec)
            return FourierValue(n, complex(re, im), re - sl, min(mpmath.mpf(1), re + sl))

    def sample(self, count: int, rng_seed: int = 0) -> list[Fraction]:
        leaf = self.leaves
        W = leaf.width
        rng = random.Random(rng_seed)
        out = []
        for _ in range(count):
            c = leaf.centers[rng.randrange(len(leaf.centers))]
            u = Fraction(rng.getrandbits(64), 1 << 64) - Fraction(1, 2)
            out.append(frac_part(c + W * u))
        return out

    def min_next_roots(self) -> list[int]:
        """For each non-leaf level, the fewest n_{m+1}-th roots inside any of its arcs."""
        out = []
        for lv, nxt in zip(self.levels, self.levels[1:]):
            half = lv.width / 2
            best = None
            for c in lv.centers:
                lo = math.ceil((c - half) * nxt.n)
                hi = math.floor((c + half) * nxt.n)
                cnt = hi - lo + 1
                best = cnt if best is None else min(best, cnt)
            out.append(best)
        return out

    def to_spec(self) -> dict:
        return {"kind": "cantor", "seq": self.seq.to_spec(), "start": self.start,
                "depth": len(self.levels)}


def _h_values(h_schedule, m: int) -> int:
    if callable(h_schedule):
        return int(h_schedule(m))
    return int(h_schedule[m - 1])


def cantor_support(seq: IntSequence, h_schedule, depth: int = 3, keep: int = 2,
                   start: int | None = None, scan: int = 40, max_arcs: int = 1 << 16) -> CantorArc:
    """Nested arcs around roots of unity for a fast-growing sequence.

    ``h_schedule`` is a rule m -> h_m or a list (h_1, h_2, ...).  The first
    level M is the least m (or ``start``) from which 1/h_m >= 10 n_m/n_{m+1}
    holds for ``depth`` consecutive levels.  Each arc keeps ``keep`` evenly
    spaced child arcs.
    """
    if keep < 2:
        raise ConstructionError("each arc must keep at least 2 children")

    def feasible(m):
        return seq.term(m + 1) >= 10 * seq.term(m) * _h_values(h_schedule, m)

    if start is None:
        for M in range(1, scan + 1):
            if all(feasible(m) for m in range(M, M + depth - 1)):
                start = M
                break
        else:
            bad = next(m for m in range(1, scan + 1) if not feasible(m))
            raise ConstructionError(
                f"schedule infeasible: 1/h_m >= 10 n_m/n_(m+1) fails at level m = {bad} "
                f"and no start level within {scan} works"
            )
    else:
        for m in range(start, start + depth - 1):
            if not feasible(m):
                raise ConstructionError(f"schedule infeasible at level m = {m}")
    nM = seq.term(start)
    levels = [ArcLevel(start, nM, _h_values(h_schedule, start), [Fraction(0)])]
    for m in range(start + 1, start + depth):
        parent = levels[-1]
        lv = ArcLevel(m, seq.term(m), _h_values(h_schedule, m))
        room = parent.width / 2 - lv.width / 2
        for c in parent.centers:
            lo = math.ceil((c - room) * lv.n)
            hi = math.floor((c + room) * lv.n)
            cnt = hi - lo + 1
            if cnt < 2:
                raise ConstructionError(f"fewer than 2 admissible roots at level m = {m}")
            k = min(keep, cnt)
            for i in range(k):
                j = lo + (i * (cnt - 1)) // (k - 1)
                lv.centers.append(Fraction(j, lv.n))
        if len(lv.centers) > max_arcs:
            raise ResourceError(f"arc count {len(lv.centers)} exceeds budget at level {m}")
        levels.append(lv)
    return CantorArc(seq, levels, h_schedule)


# ---------------------------------------------------------------------------
def fourier(measure: CircleMeasure, n: int, K: int | None = None, prec: int = DEFAULT_PREC) -> FourierValue:
    return measure.fourier(n, K, prec)


def atom_bound(measure: RieszFactors, K: int) -> Fraction:
    return measure.atom_bound(K)


def rigidity_gap_profile(measure: CircleMeasure, seq: IntSequence, M_max: int,
                         K: int | Callable[[int], int] | None = None, M_min: int = 1,
                         prec: int = DEFAULT_PREC) -> list[GapEntry]:
    """1 - Re nu^(n_m) for M_min <= m <= M_max; ``K`` may depend on m."""
    out = []
    for m in range(M_min, M_max + 1):
        n = seq.term(m)
        k = K(m) if callable(K) else K
        fv = measure.fourier(n, k, prec)
        out.append(GapEntry(m, n, 1 - fv.upper, 1 - fv.lower))
    return out


def wiener_average(measure: CircleMeasure, N: int, K: int | None = None) -> float:
    """(1/(2N+1)) sum_{|n|<=N} |nu^(n)|^2, using |nu^(-n)| = |nu^(n)|."""
    total = 1.0
    for n in range(1, N + 1):
        total += 2 * measure.abs2(n, K)
    return total / (2 * N + 1)


def sample(measure: CircleMeasure, count: int, rng_seed: int = 0) -> list[Fraction]:
    return measure.sample(count, rng_seed)


def empirical_fraction(points: Sequence[Fraction], n: int, bound: Fraction) -> Fraction:
    """Share of points with ||n x|| <= bound (exact)."""
    hits = sum(1 for x in points if dist_to_int(mod1_ratio(n, x)) <= bound)
    return Fraction(hits, len(points))


# ---------------------------------------------------------------------------
_B_RULES = {
    "harmonic": lambda k: Fraction(1, k + 1),
}


def from_spec(spec: dict, seq_from_spec=None) -> CircleMeasure:
    """Build a measure from its JSON description."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConstructionError("measure spec needs a 'kind'")
    kind = spec["kind"]
    if kind == "atomic":
        return Atomic([(a, w) for a, w in spec["atoms"]])
    if kind == "dirac":
        return Atomic.dirac(spec.get("angle", 0))
    if kind == "riesz":
        b = spec.get("b", "harmonic")
        if b in _B_RULES:
            return RieszFactors.dyadic(_B_RULES[b])
        return RieszFactors.constant_weight(b, int(spec.get("base", 2)))
    if kind not in ("block", "cantor"):
        raise ConstructionError(f"unknown measure kind {kind!r}")
    if "seq" not in spec:
        raise ConstructionError(f"measure kind {kind!r} needs a 'seq' field")
    from .sequences import from_spec as seq_spec
    seq = seq_spec(spec["seq"])
    if kind == "block":
        return OdometerBlock(seq)
    if kind == "cantor":
        h = spec.get("h", "square")
        rule = (lambda m: m * m) if h == "square" else (lambda m, v=list(h): v[m - 1])
        return cantor_support(seq, rule, int(spec.get("depth", 3)), int(spec.get("keep", 2)))
    raise ConstructionError(f"unknown measure kind {kind!r}")
