"""The (n_t)-odometer: mixed-radix adding machine, characters and cocycles.

Heights satisfy n_0 = 1 and n_{t+1} = rho_t n_t with integer rho_t >= 2.
A point is a digit sequence (x_0, x_1, ...) with 0 <= x_t < rho_t; T adds
1 at digit 0 and carries to the right.  Everything that depends only on
finitely many digits (characters, cylinder sets, cocycle sums along n) is
computed exactly.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Iterable, Sequence

import mpmath

from . import sequences
from .errors import ConstructionError, InvariantViolation
from .rankone import CyclicSystem
from .rotation import _iv_prec, _raw_fraction

MAX_DIGITS = 100_000


class OdometerSystem:
    """Ratios rho_t (t >= 0) given as a finite list, an affine rule or a callable."""

    def __init__(self, ratios: Sequence[int] | Callable[[int], int], label: str = "odometer",
                 params: dict | None = None):
        if callable(ratios):
            self._rule = ratios
            self.length = None
        else:
            rs = [int(r) for r in ratios]
            if not rs:
                raise ConstructionError("empty ratio list")
            self._rule = rs.__getitem__
            self.length = len(rs)
        self.label = label
        self.params = params if params is not None else {"ratios": list(ratios)}
        self._n = [1]

    @classmethod
    def affine(cls, u: int, v: int) -> "OdometerSystem":
        """rho_t = u t + v; (1, 2) gives rho = (2, 3, 4, ...) and n_t = (t+1)!."""
        if u < 0 or v < 2:
            raise ConstructionError("affine ratio rule must stay >= 2")
        return cls(lambda t: u * t + v, f"affine({u},{v})", {"affine": [u, v]})

    @classmethod
    def constant(cls, rho: int) -> "OdometerSystem":
        if rho < 2:
            raise ConstructionError("ratio must be >= 2")
        return cls(lambda t: rho, f"constant({rho})", {"constant": rho})

    def rho(self, t: int) -> int:
        if t < 0:
            raise IndexError(t)
        if self.length is not None and t >= self.length:
            raise ConstructionError(f"ratio rho_{t} is beyond the {self.length} given ratios")
        r = int(self._rule(t))
        if r < 2:
            raise ConstructionError(f"ratio rho_{t} = {r} < 2")
        return r

    def n(self, t: int) -> int:
        if t > MAX_DIGITS:
            raise ConstructionError(f"height index {t} exceeds {MAX_DIGITS}")
        while len(self._n) <= t:
            self._n.append(self._n[-1] * self.rho(len(self._n) - 1))
        return self._n[t]

    def digits(self, r: int) -> list[int]:
        """Mixed-radix expansion r = sum a_t n_t, 0 <= a_t < rho_t (empty for r = 0)."""
        if r < 0:
            raise ValueError("r must be non-negative")
        out, t = [], 0
        while r:
            r, a = divmod(r, self.rho(t))
            out.append(a)
            t += 1
        return out

    def value(self, digits: Sequence[int]) -> int:
        return sum(a * self.n(t) for t, a in enumerate(digits))

    def heights(self) -> sequences.IntSequence:
        """(n_t)_{t >= 1} as an integer-ratio sequence."""
        if "affine" in self.params:
            u, v = self.params["affine"]
            return sequences.integer_ratio_product(affine=(u, v - u))
        if "constant" in self.params:
            return sequences.powers(self.params["constant"])
        if self.length is not None:
            return sequences.integer_ratio_product([self.rho(t) for t in range(self.length)])
        return sequences.IntSequence("integer_ratio_product", {"odometer": self.label}, self.n)

    def point(self, digits: Iterable[int] = (), extension: str = "zero",
              seed: int = 0) -> "OdometerPoint":
        return OdometerPoint(self, tuple(int(d) for d in digits), extension, seed)

    def unit(self) -> "OdometerPoint":
        """The point 1^ = (1, 0, 0, ...)."""
        return self.point((1,))

    def cylinder_model(self, depth: int) -> CyclicSystem:
        """T acting on depth-``depth`` cylinders is rotation by 1 on Z/n_depth."""
        return CyclicSystem(self.n(depth))

    def to_spec(self) -> dict:
        return dict(self.params)

    def __repr__(self):
        return f"OdometerSystem({self.label})"


@dataclass(frozen=True)
class OdometerPoint:
    """A digit prefix plus an extension rule for the digits beyond it.

    ``extension`` is "zero" (zero-fill), "sample" (digit t drawn uniformly
    from a generator seeded by (seed, t), so reads are reproducible) or
    "none" (reading past the prefix is an error).
    """

    system: OdometerSystem
    prefix: tuple[int, ...]
    extension: str = "zero"
    seed: int = 0

    def __post_init__(self):
        if self.extension not in ("zero", "sample", "none"):
            raise ConstructionError(f"unknown extension rule {self.extension!r}")
        for t, d in enumerate(self.prefix):
            if not 0 <= d < self.system.rho(t):
                raise ConstructionError(f"digit x_{t} = {d} out of range [0, {self.system.rho(t)})")

    def digit(self, t: int) -> int:
        if t < len(self.prefix):
            return self.prefix[t]
        if self.extension == "zero":
            return 0
        if self.extension == "sample":
            return random.Random(f"{self.seed}:{t}").randrange(self.system.rho(t))
        raise ConstructionError(f"digit {t} is beyond the materialized prefix")

    def digits(self, L: int) -> tuple[int, ...]:
        return tuple(self.digit(t) for t in range(L))

    def residue(self, depth: int) -> int:
        """sum_{t < depth} x_t n_t, the level of x in the height-n_depth tower."""
        return sum(self.digit(t) * self.system.n(t) for t in range(depth))

    def add(self, r: int) -> "OdometerPoint":
        """T^r x, exact mixed-radix addition with carry (r >= 0)."""
        if r < 0:
            raise ValueError("r must be non-negative")
        rd = self.system.digits(r)
        out, carry, t = [], 0, 0
        while t < max(len(rd), len(self.prefix)) or carry:
            if t >= len(self.prefix) and self.extension == "none":
                raise ConstructionError(f"carry reaches digit {t} beyond the prefix")
            s = self.digit(t) + (rd[t] if t < len(rd) else 0) + carry
            carry, d = divmod(s, self.system.rho(t))
            out.append(d)
            t += 1
        return OdometerPoint(self.system, tuple(out), self.extension, self.seed)


def add(point: OdometerPoint, r: int) -> OdometerPoint:
    return point.add(r)


def character(m: int, point: OdometerPoint) -> Fraction:
    """Angle j/n_m of 1_{n_m}(x) = exp(2 pi i j / n_m), reduced mod 1."""
    return Fraction(point.residue(m), point.system.n(m))


def character_value(m: int, point: OdometerPoint, prec: int = 53) -> mpmath.mpc:
    ang = character(m, point)
    with mpmath.workprec(prec):
        c, s = mpmath.cospi(2 * mpmath.mpf(ang.numerator) / ang.denominator), \
            mpmath.sinpi(2 * mpmath.mpf(ang.numerator) / ang.denominator)
        return mpmath.mpc(c, s)


def trailing_zero_digits(system: OdometerSystem, r: int) -> int:
    """Number of leading zero digits of r in its mixed-radix expansion (r >= 1)."""
    if r < 1:
        raise ValueError("r must be >= 1")
    t = 0
    while r % system.rho(t) == 0:
        r //= system.rho(t)
        t += 1
    return t


def cylinder_delta(system: OdometerSystem, r: int, t0: int) -> Fraction:
    """p(T^r A D A) for A = D_0^{n_{t0+1}}, the base of the height-n_{t0+1} tower.

    T^r moves A to level r mod n_{t0+1}; the result is 0 when that level
    is 0 and 2/n_{t0+1} otherwise.  In particular it is 2/n_{t0+1} when r
    has exactly t0 trailing zero digits.
    """
    if r < 1:
        raise ValueError("r must be >= 1")
    h = system.n(t0 + 1)
    return Fraction(0) if r % h == 0 else Fraction(2, h)


def cylinder_delta_bruteforce(system: OdometerSystem, r: int, t0: int) -> Fraction:
    """Same quantity by shifting the level mask of the height-n_{t0+1} tower."""
    cyc = system.cylinder_model(t0 + 1)
    A = cyc.cylinder(0, cyc.N)
    return cyc.measure(cyc.shift(A, r) ^ A)


def rigidity_profile(system: OdometerSystem, t: int, M: int) -> list[tuple[int, Fraction]]:
    """(m, p(T^{n_m} D_0^{n_t} D D_0^{n_t})) for m = 1..M; zero once m >= t."""
    return [(m, Fraction(0) if t == 0 else cylinder_delta(system, system.n(m), t - 1))
            for m in range(1, M + 1)]


# ---------------------------------------------------------------- cocycles


@dataclass(frozen=True)
class CocycleEntry:
    """Coefficient a_{n_m} = sqrt(abs2) exp(2 pi i phase).

    Storing |a|^2 exactly keeps every l^2 quantity rational even when a
    itself is irrational, as in 1/(sqrt(k) n).
    """

    m: int
    abs2: Fraction
    phase: Fraction = Fraction(0)

    def value(self) -> mpmath.mpc:
        r = mpmath.sqrt(mpmath.mpf(self.abs2.numerator) / self.abs2.denominator)
        ph = 2 * mpmath.mpf(self.phase.numerator) / self.phase.denominator
        return mpmath.mpc(r * mpmath.cospi(ph), r * mpmath.sinpi(ph))


@dataclass(frozen=True)
class CocycleSpec:
    """f = sum_m a_{n_m} 1_{n_m}, truncated at ``trunc``."""

    system: OdometerSystem
    entries: tuple[CocycleEntry, ...]
    trunc: int
    label: str = "cocycle"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        ms = [e.m for e in self.entries]
        if len(set(ms)) != len(ms):
            raise ConstructionError("support indices must be distinct")
        if any(m < 1 or m > self.trunc for m in ms):
            raise ConstructionError("support must lie in 1..trunc")
        if any(e.abs2 < 0 for e in self.entries):
            raise ConstructionError("|a|^2 must be non-negative")

    @classmethod
    def from_coefficients(cls, system: OdometerSystem, coeffs: dict[int, Fraction | int],
                          trunc: int | None = None) -> "CocycleSpec":
        """Real rational coefficients {m: a}."""
        entries = []
        for m, a in sorted(coeffs.items()):
            a = Fraction(a)
            entries.append(CocycleEntry(int(m), a * a, Fraction(1, 2) if a < 0 else Fraction(0)))
        trunc = max(coeffs, default=0) if trunc is None else trunc
        return cls(system, tuple(entries), trunc, "explicit")

    @cached_property
    def l2(self) -> Fraction:
        return sum((e.abs2 for e in self.entries), Fraction(0))

    def tail_l2(self, m0: int) -> Fraction:
        return sum((e.abs2 for e in self.entries if e.m > m0), Fraction(0))


def sidon_indices(system: OdometerSystem, count: int, start: int = 1) -> list[int]:
    """Greedy m_1 < m_2 < ... with n_{m_{k+1}} >= 2 n_{m_k}."""
    out = [start]
    m = start
    while len(out) < count:
        m += 1
        if system.n(m) >= 2 * system.n(out[-1]):
            out.append(m)
    return out


def good_function(system: OdometerSystem, K: int) -> CocycleSpec:
    """a_{n_{m_k}} = 1/(sqrt(k) n_{m_k}) for k = 1..K on a lacunary index set."""
    ms = sidon_indices(system, K)
    entries = tuple(CocycleEntry(m, Fraction(1, k * system.n(m) ** 2)) for k, m in enumerate(ms, 1))
    return CocycleSpec(system, entries, ms[-1], "good", {"K": K})


def harmonic_weights(system: OdometerSystem, K: int) -> CocycleSpec:
    """a_{n_m} = 1/(m n_m); the weighted l^2 sums converge to pi^2/6."""
    entries = tuple(CocycleEntry(m, Fraction(1, m * m * system.n(m) ** 2)) for m in range(1, K + 1))
    return CocycleSpec(system, entries, K, "harmonic", {"K": K})


@dataclass(frozen=True)
class CocycleTerm:
    """a_{n_m} sum_{j < length} exp(2 pi i (start + j/n_m)); length is n mod n_m."""

    m: int
    start: Fraction
    length: int

    @property
    def vanishes(self) -> bool:
        return self.length == 0


def cocycle_terms(f: CocycleSpec, point: OdometerPoint, n: int) -> list[CocycleTerm]:
    """Exact root-of-unity form of f^{(n)}(x): full cycles of n_m-th roots cancel."""
    if n < 0:
        raise ValueError("n must be non-negative")
    return [CocycleTerm(e.m, character(e.m, point), n % f.system.n(e.m)) for e in f.entries]


@dataclass
class CocycleValue:
    value: complex
    vanished: list[int]
    active: list[int]


def cocycle_sum(f: CocycleSpec, point: OdometerPoint, n: int, prec: int = 80) -> CocycleValue:
    """f^{(n)}(x) = sum_m a_{n_m} (1 - e^n)/(1 - e) 1_{n_m}(x), e = exp(2 pi i/n_m)."""
    terms = cocycle_terms(f, point, n)
    total = mpmath.mpc(0)
    vanished, active = [], []
    with mpmath.workprec(prec):
        for e, term in zip(f.entries, terms):
            if term.vanishes:
                vanished.append(e.m)
                continue
            active.append(e.m)
            h = f.system.n(e.m)
            eps = mpmath.expjpi(mpmath.mpf(2) / h)
            geo = (1 - eps ** term.length) / (1 - eps)
            ang = 2 * mpmath.mpf(term.start.numerator) / term.start.denominator
            total += e.value() * geo * mpmath.expjpi(ang)
    return CocycleValue(complex(total), vanished, active)


@dataclass
class NormBound:
    """||f^{(n_{m0})}||^2 bracketed in [lower, upper] against the bound n_{m0}^2 sum_{m>m0}|a|^2."""

    m0: int
    lower: Fraction
    upper: Fraction
    bound: Fraction

    @property
    def holds(self) -> bool:
        return self.upper <= self.bound


def _fejer_ratio(n0: int, h: int, prec: int) -> tuple[Fraction, Fraction]:
    """Certified bracket for sin^2(pi n0/h) / sin^2(pi/h)."""
    with _iv_prec(prec):
        iv = mpmath.iv
        num = iv.sin(iv.pi * iv.mpf(n0) / h) ** 2
        den = iv.sin(iv.pi / iv.mpf(h)) ** 2
        q = num / den
        lo, hi = (_raw_fraction(r) for r in q._mpi_)
    return max(lo, Fraction(0)), hi


def cocycle_norm_bound(f: CocycleSpec, m0: int) -> NormBound:
    """Orthonormality of characters gives
    ||f^{(n)}||^2 = sum_m |a_{n_m}|^2 |1 - e^n|^2 / |1 - e|^2 with n = n_{m0};
    indices m <= m0 contribute 0 and the remaining ratios are bracketed with
    interval arithmetic."""
    if f.trunc <= m0:
        raise ConstructionError("truncation must exceed m0")
    n0 = f.system.n(m0)
    lo = hi = Fraction(0)
    for e in f.entries:
        if e.m <= m0 or e.abs2 == 0:
            continue
        h = f.system.n(e.m)
        prec = 2 * h.bit_length() + 64
        a, b = _fejer_ratio(n0, h, prec)
        lo += e.abs2 * a
        hi += e.abs2 * b
    return NormBound(m0, lo, hi, n0 * n0 * f.tail_l2(m0))


@dataclass
class CoboundaryReport:
    partial_sums: list[Fraction]
    diverging: bool
    fit: str

    @property
    def total(self) -> Fraction:
        return self.partial_sums[-1] if self.partial_sums else Fraction(0)


def coboundary_test(f: CocycleSpec) -> CoboundaryReport:
    """Partial sums of |n_m a_{n_m}|^2 in support order.

    f = g - g o T has an L^2 solution exactly when these sums stay bounded.
    Over a finite truncation the verdict is a growth fit: partial sums
    tracking the harmonic numbers are reported as diverging, sums whose
    increments are dominated by C/k^2 as bounded.
    """
    sums, s = [], Fraction(0)
    incs = []
    for e in f.entries:
        inc = e.abs2 * f.system.n(e.m) ** 2
        incs.append(inc)
        s += inc
        sums.append(s)
    if not sums or s == 0:
        return CoboundaryReport(sums, False, "zero")
    K = len(incs)
    tail = incs[K // 2:]
    ks = range(K // 2 + 1, K + 1)
    if all(inc * k == incs[0] for inc, k in zip(tail, ks)):
        return CoboundaryReport(sums, True, "harmonic")
    scale = max(inc * k * k for inc, k in zip(incs, range(1, K + 1)))
    if all(inc * k * k <= scale for inc, k in zip(tail, ks)) and scale <= 4 * incs[0]:
        return CoboundaryReport(sums, False, "inverse-square")
    lin = [inc * k for inc, k in zip(tail, ks)]
    diverging = min(lin) >= incs[0] / 2
    return CoboundaryReport(sums, diverging, "at least harmonic" if diverging else "undetermined")


def harmonic(K: int) -> Fraction:
    return sum((Fraction(1, k) for k in range(1, K + 1)), Fraction(0))


def good_function_decay(f: CocycleSpec, s_max: int) -> list[tuple[int, Fraction, Fraction]]:
    """(s, n_s^2 sum_{m>s}|a_{n_m}|^2, k_s times that) for s = 1..s_max.

    For the good function the bound decays like C/k_s, where k_s is the
    first k with m_k > s; the third column stays bounded.
    """
    out = []
    ms = [e.m for e in f.entries]
    for s in range(1, s_max + 1):
        b = f.system.n(s) ** 2 * f.tail_l2(s)
        k_s = next((k for k, m in enumerate(ms, 1) if m > s), len(ms) + 1)
        out.append((s, b, b * k_s))
    return out


# ------------------------------------------------------- non-recurrence glue


def base_cylinder(system: OdometerSystem, t: int, depth: int):
    """D_0^{n_t} inside the depth-``depth`` cyclic model (t >= 1 so TA n A is empty)."""
    if not 1 <= t <= depth:
        raise ConstructionError("need 1 <= t <= depth")
    cyc = system.cylinder_model(depth)
    return cyc, cyc.cylinder(0, system.n(t))


def check_cylinder_delta(system: OdometerSystem, t0: int, rs: Iterable[int]) -> None:
    for r in rs:
        if cylinder_delta(system, r, t0) != cylinder_delta_bruteforce(system, r, t0):
            raise InvariantViolation(f"cylinder delta mismatch at r={r}, t0={t0}")


# ------------------------------------------------------------ experiments


def greedy_heights(beta: Fraction, count: int) -> list[int]:
    """n_t = floor(beta^t), t = 0..count-1, for a bounded non-integer ratio."""
    beta = Fraction(beta)
    if beta <= 1:
        raise ConstructionError("beta must exceed 1")
    return [(beta ** t).numerator // (beta ** t).denominator for t in range(count)]


def greedy_expansion(ns: Sequence[int], r: int) -> list[int]:
    """Greedy digits of r against heights ns (largest first), lowest index first."""
    digits = [0] * len(ns)
    for t in range(len(ns) - 1, -1, -1):
        if ns[t] <= r:
            digits[t], r = divmod(r, ns[t])
    if r:
        raise ConstructionError("heights too short for r")
    return digits


def bounded_ratio_experiment(beta: Fraction, count: int = 24, k_values: Sequence[int] = (2, 4, 6),
                             samples: int = 200, seed: int = 0) -> dict:
    """For n_t = floor(beta^t): the lowest greedy-digit index of random finite
    sums of n_t over t >= k.  Data only, no verdict."""
    ns = greedy_heights(beta, count + 1)
    rng = random.Random(seed)
    rows = {}
    for k in k_values:
        lows = []
        for _ in range(samples):
            idx = [t for t in range(k, count) if rng.random() < 0.5] or [k]
            r = sum(ns[t] for t in idx)
            d = greedy_expansion(ns, r)
            lows.append(next(t for t, a in enumerate(d) if a))
        rows[k] = {"min_low_index": min(lows), "mean_low_index": Fraction(sum(lows), len(lows))}
    return {"beta": Fraction(beta), "heights": ns, "rows": rows}


def from_spec(spec) -> OdometerSystem:
    """{"ratios": [...]}, {"affine": [u, v]} or {"constant": rho}."""
    if isinstance(spec, OdometerSystem):
        return spec
    if not isinstance(spec, dict):
        raise ConstructionError(f"odometer spec must be a mapping, got {spec!r}")
    if "affine" in spec:
        u, v = spec["affine"]
        return OdometerSystem.affine(int(u), int(v))
    if "constant" in spec:
        return OdometerSystem.constant(int(spec["constant"]))
    if "ratios" in spec:
        return OdometerSystem([int(r) for r in spec["ratios"]])
    raise ConstructionError(f"unknown odometer spec {spec!r}")
