"""Cutting-and-stacking rank-one transformations.

A tower of height h is a stack of h disjoint intervals (levels) of equal
width; T maps each level linearly onto the one above it.  Stage m -> m+1
cuts tau_m into q_m equal columns and stacks them, inserting r_{m,j}
new spacer levels before column j (j = q_m means on top).

Everything is exact: level widths are rationals and T^n on a union of
levels is an index shift inside a deep enough tower.  The only unknown is
where the top n levels of the deepest tower go; that mass is carried as
the width of the returned bracket.

Units: a level of the first tower has width 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import ConstructionError, InvariantViolation, ResourceError
from .sequences import IntSequence

MAX_LEVELS = 10**7
MAX_WORD = 10**8
MAX_HEIGHT = 1 << 62  # level indices live in int64

Stage = tuple[int, tuple[int, ...]]  # (q, spacers of length q + 1)


@dataclass
class RankOneSpec:
    """Stage rule ``m -> (q_m, (r_{m,0}, ..., r_{m,q_m}))`` starting from tau_start."""

    h_start: int
    rule: Callable[[int], Stage]
    start: int = 1
    label: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.h_start < 1:
            raise ConstructionError("initial height must be >= 1")
        self._stages: dict[int, Stage] = {}
        self._h = {self.start: self.h_start}

    def stage(self, m: int) -> Stage:
        """(q_m, spacers) used to pass from tau_m to tau_{m+1}."""
        if m < self.start:
            raise IndexError(f"stages begin at {self.start}")
        got = self._stages.get(m)
        if got is None:
            q, sp = self.rule(m)
            sp = tuple(int(r) for r in sp)
            if q < 1 or len(sp) != q + 1 or any(r < 0 for r in sp):
                raise ConstructionError(f"invalid stage {m}: q={q}, spacers={sp}")
            got = (int(q), sp)
            self._stages[m] = got
        return got

    def height(self, m: int) -> int:
        """h_m = q_{m-1} h_{m-1} + sum_j r_{m-1,j}, without building anything."""
        if m < self.start:
            raise IndexError(f"towers begin at {self.start}")
        k = max(x for x in self._h if x <= m)
        h = self._h[k]
        while k < m:
            q, sp = self.stage(k)
            h = q * h + sum(sp)
            k += 1
            self._h[k] = h
        return h

    def width(self, m: int) -> Fraction:
        w = Fraction(1)
        for k in range(self.start, m):
            w /= self.stage(k)[0]
        return w

    def mass(self, m: int) -> Fraction:
        """Total measure of tau_m."""
        return self.height(m) * self.width(m)

    def spacer_ratio(self, m: int) -> Fraction:
        """Share of tau_{m+1} made of spacers added at stage m."""
        return Fraction(sum(self.stage(m)[1]), self.height(m + 1))

    def finite_measure_evidence(self, M: int) -> bool:
        """True when the mass of tau_M has stopped growing (within 1/8 since stage M/2)."""
        half = self.start + (M - self.start) // 2
        return self.mass(M) < self.mass(half) * Fraction(9, 8)


# -- presets ----------------------------------------------------------------
def chacon() -> RankOneSpec:
    """Three columns with one spacer over the middle one; h_0 = 1."""
    return RankOneSpec(1, lambda m: (3, (0, 0, 1, 0)), start=0, label="chacon")


def concatenation(q: int = 2, h1: int = 1) -> RankOneSpec:
    return RankOneSpec(h1, lambda m: (q, (0,) * (q + 1)), label="concat", params={"q": q})


def _ratio_evidence(seq: IntSequence, horizon: int) -> bool:
    """Ratios n_{m+1}/n_m growing over the horizon: late minimum beyond early maximum."""
    ts = seq.terms(horizon + 1)
    ratios = [Fraction(b, a) for a, b in zip(ts, ts[1:])]
    third = max(1, len(ratios) // 3)
    return min(ratios[-third:]) > max(ratios[:third]) and ratios[-1] >= 3


def preset_infrankone(seq: IntSequence, horizon: int = 9) -> RankOneSpec:
    """Heights h_m = n_m; s_m columns followed by r_m + p_m h_m spacers.

    p_m is the least l >= 0 with (r_m + l h_m)/h_{m+1} > 1/m, kept below
    q_m (for the first stages this cap can bind; s_m >= 1 always).
    """
    if not _ratio_evidence(seq, horizon):
        raise ConstructionError("ratios n_(m+1)/n_m show no growth over the horizon")

    def rule(m: int) -> Stage:
        h, h1 = seq.term(m), seq.term(m + 1)
        q, r = divmod(h1, h)
        if q < 1:
            raise ConstructionError(f"n_{m+1} < n_{m}")
        p = p_of(m)
        s = q - p
        return s, (0,) * s + (r + p * h,)

    def p_of(m: int) -> int:
        h, h1 = seq.term(m), seq.term(m + 1)
        q, r = divmod(h1, h)
        # least l with m (r + l h) > h1
        l = max(0, (h1 - m * r) // (m * h) + 1)
        return min(l, q - 1)

    spec = RankOneSpec(seq.term(1), rule, start=1, label="infrankone", params={"seq": seq.to_spec()})
    spec.p_of = p_of
    spec.s_of = lambda m: spec.stage(m)[0]
    return spec


def preset_specialinfrankone(seq: IntSequence, horizon: int = 9) -> RankOneSpec:
    """floor(q/3) copies, one spacer, the remaining copies, then r - 1 spacers."""
    ts = seq.terms(horizon + 1)
    qs, rs = [], []
    for a, b in zip(ts, ts[1:]):
        q, r = divmod(b, a)
        qs.append(q)
        rs.append(r)
    third = max(1, len(qs) // 3)
    if not min(qs[-third:]) > max(qs[:third]):
        raise ConstructionError("q_m shows no growth over the horizon")
    if not any(rs[len(rs) // 2:]):
        raise ConstructionError("r_m vanishes on the second half of the horizon")
    tail = sum(Fraction(r, b) for r, b in zip(rs[len(rs) // 2:], ts[len(rs) // 2 + 1:]))
    if tail > Fraction(1, 4):
        raise ConstructionError("sum r_m / n_(m+1) shows no convergence over the horizon")

    def rule(m: int) -> Stage:
        h, h1 = seq.term(m), seq.term(m + 1)
        q, r = divmod(h1, h)
        if r == 0:
            return q, (0,) * (q + 1)
        a = q // 3
        sp = [0] * (q + 1)
        sp[a] += 1
        sp[q] += r - 1
        return q, tuple(sp)

    return RankOneSpec(seq.term(1), rule, start=1, label="specialinfrankone",
                       params={"seq": seq.to_spec()})


# -- towers ------------------------------------------------------------------
@dataclass
class TowerState:
    """tau_M with the column placements of every earlier stage."""

    spec: RankOneSpec
    stage: int
    # placements[m] = level indices in tau_{m+1} where the copies of tau_m start
    placements: dict[int, np.ndarray]

    @property
    def height(self) -> int:
        return self.spec.height(self.stage)

    @property
    def width(self) -> Fraction:
        return self.spec.width(self.stage)

    @property
    def mass(self) -> Fraction:
        return self.height * self.width

    def copies(self, k: int) -> np.ndarray:
        """Start indices in tau_M of the copies of tau_k, ascending."""
        if not self.spec.start <= k <= self.stage:
            raise IndexError(f"stage {k} is outside [{self.spec.start}, {self.stage}]")
        offs = np.zeros(1, dtype=np.int64)
        for m in range(self.stage - 1, k - 1, -1):
            # a copy of tau_{m+1} at offset o contains tau_m copies at o + P_m
            if offs.size * self.placements[m].size > MAX_LEVELS:
                raise ResourceError("copy table exceeds the level budget")
            offs = np.add.outer(offs, self.placements[m]).ravel()
        return np.sort(offs)

    def level_points(self, k: int, levels: Iterable[int], max_points: int = MAX_LEVELS) -> np.ndarray:
        """Sorted tau_M level indices making up a union of tau_k levels."""
        hk = self.spec.height(k)
        J = np.array(sorted(set(int(j) for j in levels)), dtype=np.int64)
        if J.size and (J[0] < 0 or J[-1] >= hk):
            raise IndexError(f"levels must lie in [0, {hk})")
        offs = self.copies(k)
        if offs.size * J.size > max_points:
            raise ResourceError(f"{offs.size * J.size} level pieces exceed the budget {max_points}")
        return np.sort(np.add.outer(offs, J).ravel())

    def level_set(self, k: int, levels: Iterable[int]) -> np.ndarray:
        """Boolean mask over tau_M levels for a union of tau_k levels."""
        if self.height > MAX_LEVELS:
            raise ResourceError(f"h_{self.stage} exceeds the level budget")
        mask = np.zeros(self.height, dtype=bool)
        mask[self.level_points(k, levels)] = True
        return mask

    def level_interval(self, i: int) -> tuple[Fraction, Fraction]:
        """Exact [left, right) of level i of tau_M on the real line.

        tau_start occupies [0, h_start); spacers of stage m are laid out to the
        right of everything built before, in level order.
        """
        return _level_interval(self.spec, self.placements, self.stage, i)

    def is_spacer(self, i: int, k: int) -> bool:
        """True when level i of tau_M is outside every copy of tau_k."""
        offs = self.copies(k)
        pos = np.searchsorted(offs, i, side="right") - 1
        return pos < 0 or i - int(offs[pos]) >= self.spec.height(k)


def _placements(spec: RankOneSpec, m: int) -> np.ndarray:
    q, sp = spec.stage(m)
    h = spec.height(m)
    out = np.empty(q, dtype=np.int64)
    pos = 0
    for c in range(q):
        pos += sp[c]
        out[c] = pos
        pos += h
    return out


def _level_interval(spec, placements, M, i):
    h = spec.height(M)
    if not 0 <= i < h:
        raise IndexError("level index out of range")
    if M == spec.start:
        return Fraction(i), Fraction(i + 1)
    P = placements[M - 1]
    hp = spec.height(M - 1)
    w = spec.width(M)
    c = int(np.searchsorted(P, i, side="right")) - 1
    if c >= 0 and i - int(P[c]) < hp:
        lo, _ = _level_interval(spec, placements, M - 1, i - int(P[c]))
        return lo + c * w, lo + (c + 1) * w
    # spacer: count spacer levels of tau_M below i
    below = i - sum(min(max(i - int(p), 0), hp) for p in P)
    base = spec.mass(M - 1) + sum(
        Fraction(sum(spec.stage(k)[1])) * spec.width(k + 1) for k in range(spec.start, M - 1)
    )
    return base + below * w, base + (below + 1) * w


def build(spec: RankOneSpec, M: int, max_levels: int = MAX_LEVELS) -> TowerState:
    if M < spec.start:
        raise ConstructionError(f"stage {M} precedes the first stage {spec.start}")
    if spec.height(M) > max_levels:
        raise ResourceError(f"h_{M} = {spec.height(M)} exceeds the level budget {max_levels}")
    placements = {m: _placements(spec, m) for m in range(spec.start, M)}
    return TowerState(spec, M, placements)


@dataclass(frozen=True)
class DeltaBracket:
    """Exact brackets for a union E of tau_k levels and a shift n.

    ``inter`` brackets mu(T^n E n E); the others follow from measure
    preservation: mu(T^n E \\ E) = mu(E) - mu(T^n E n E) and
    mu(T^n E D E) = 2 (mu(E) - mu(T^n E n E)).
    """

    n: int
    stage: int
    mu_E: Fraction
    inter_lower: Fraction
    inter_upper: Fraction

    @property
    def delta_lower(self) -> Fraction:
        return 2 * (self.mu_E - self.inter_upper)

    @property
    def delta_upper(self) -> Fraction:
        return 2 * (self.mu_E - self.inter_lower)

    @property
    def minus_lower(self) -> Fraction:
        """Lower bound for mu(T^n E \\ E)."""
        return self.mu_E - self.inter_upper

    @property
    def minus_upper(self) -> Fraction:
        return self.mu_E - self.inter_lower

    @property
    def width(self) -> Fraction:
        return self.delta_upper - self.delta_lower


def _bracket_at(tower: TowerState, k: int, levels, n: int,
               max_points: int = MAX_LEVELS) -> DeltaBracket:
    pts = tower.level_points(k, levels, max_points)
    h = tower.height
    w = tower.width
    total = int(pts.size)
    if n >= h:
        known, unknown = 0, total
    elif n == 0:
        known, unknown = total, 0
    else:
        # pts + n < h for every known hit, so membership in pts is exact
        known = int(np.count_nonzero(np.isin(pts + n, pts, assume_unique=True)))
        unknown = int(np.count_nonzero(pts >= h - n))
    return DeltaBracket(n, tower.stage, total * w, known * w, (known + unknown) * w)


def delta_mass(spec: RankOneSpec, k: int, levels: Iterable[int], n: int,
               tol: Fraction = Fraction(1, 10**6), max_points: int = MAX_LEVELS,
               relative: bool = True) -> DeltaBracket:
    """Bracket mu(T^n E D E) for E a union of tau_k levels.

    Stages are added until the bracket width is below ``tol`` (relative to
    mu(E) by default).  The budget counts the pieces of E in the deepest
    tower.  Raises ResourceError carrying the best bracket when it runs out.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    levels = list(levels)
    M = k
    best = None
    while True:
        try:
            tower = build(spec, M, max_levels=MAX_HEIGHT)
            br = _bracket_at(tower, k, levels, n, max_points)
        except ResourceError as exc:
            raise ResourceError(f"cannot reach tolerance {tol}: {exc}", partial=best) from None
        best = br
        scale = br.mu_E if relative and br.mu_E else 1
        if br.width < tol * scale:
            return br
        M += 1


def is_eps_rigid(spec: RankOneSpec, k: int, n: int, eps: Fraction, stage: int) -> bool:
    """mu(T^n E D E) < eps mu(E) for every level E of tau_k, evaluated in tau_stage."""
    tower = build(spec, stage, max_levels=MAX_HEIGHT)
    for j in range(spec.height(k)):
        br = _bracket_at(tower, k, [j], n)
        if not br.delta_upper < eps * br.mu_E:
            return False
    return True


# -- Chacon words -----------------------------------------------------------
@dataclass(frozen=True)
class ChaconWord:
    k: int
    word: str

    @property
    def length(self) -> int:
        return len(self.word)

    @property
    def ones(self) -> int:
        return self.word.count("1")

    def bits(self) -> int:
        """Bitset with bit i set when position i holds a 1."""
        return int(self.word[::-1], 2)

    def rle(self) -> str:
        return rle(self.word)


def chacon_word(k: int) -> ChaconWord:
    """B_0 = 0, B_{k+1} = B_k B_k 1 B_k."""
    if k < 0:
        raise ValueError("k must be >= 0")
    if (3 ** (k + 1) - 1) // 2 > MAX_WORD:
        raise ResourceError(f"B_{k} is longer than {MAX_WORD} symbols")
    w = "0"
    for _ in range(k):
        w = w + w + "1" + w
    return ChaconWord(k, w)


def chacon_height(m: int) -> int:
    return (3 ** (m + 1) - 1) // 2


def chacon_spacer_word(k: int, stage: int = 1) -> str:
    """Name of the base of tau_k marking only the spacer added at ``stage``."""
    if (3 ** (k + 1) - 1) // 2 > MAX_WORD:
        raise ResourceError(f"B_{k} is longer than {MAX_WORD} symbols")
    w = "0"
    for i in range(1, k + 1):
        w = w + w + ("1" if i == stage else "0") + w
    return w


def chacon_nonrecurrence_check(k: int, m: int, shift: int | None = None,
                               all_spacers: bool = False) -> bool:
    """No position of B_k carries the first spacer level A both at i and at i + (h_m - 1).

    By default only the occurrences of A (the spacer added when passing
    from tau_0 to tau_1) are marked, which is what T^{h_m - 1} A n A = 0
    needs.  ``all_spacers=True`` marks every spacer instead; that stronger
    word statement is false already at (k, m) = (2, 1).
    """
    if not m < k:
        raise ValueError("need m < k")
    s = chacon_height(m) - 1 if shift is None else shift
    w = chacon_word(k).word if all_spacers else chacon_spacer_word(k, 1)
    b = int(w[::-1], 2)
    return (b >> s) & b == 0


def rle(word: str) -> str:
    """Run-length encoding, e.g. '0010' -> '0*2 1 0'."""
    out = []
    i = 0
    while i < len(word):
        j = i
        while j < len(word) and word[j] == word[i]:
            j += 1
        run = j - i
        out.append(word[i] if run == 1 else f"{word[i]}*{run}")
        i = j
    return " ".join(out)


# -- non-recurrence from rigidity ---------------------------------------------
class CyclicSystem:
    """Rotation x -> x + 1 on Z/N with uniform measure.

    Exact model for an odometer read through its depth-d cylinders
    (N = n_d), and for periodic toy systems.
    """

    def __init__(self, N: int):
        if N < 1:
            raise ConstructionError("N must be >= 1")
        if N > MAX_LEVELS:
            raise ResourceError(f"cyclic model of size {N} exceeds the budget")
        self.N = N

    def empty(self) -> np.ndarray:
        return np.zeros(self.N, dtype=bool)

    def cylinder(self, residue: int, modulus: int) -> np.ndarray:
        """{x : x = residue mod modulus}; modulus must divide N."""
        if self.N % modulus:
            raise ConstructionError("cylinder modulus must divide N")
        s = self.empty()
        s[residue % modulus::modulus] = True
        return s

    def shift(self, s: np.ndarray, r: int) -> np.ndarray:
        """T^r s."""
        return np.roll(s, r % self.N)

    def measure(self, s: np.ndarray) -> Fraction:
        return Fraction(int(np.count_nonzero(s)), self.N)


@dataclass
class NonRecurrentSet:
    C: np.ndarray
    indices: list[int]
    shifts: list[int]
    p_C: Fraction
    p_A: Fraction
    delta_sum: Fraction
    intersections: list[Fraction]


def nonrecurrent_set_from_rigidity(system: CyclicSystem, A: np.ndarray, seq: IntSequence,
                                   budget: Fraction = Fraction(1, 100), count: int = 20,
                                   horizon: int = 200) -> NonRecurrentSet:
    """Select m_1 < m_2 < ... with sum p(T^{n_m} A D A) <= budget p(A) and remove
    T^{-(n-1)}(T^{n-1} TA D A) from TA for every selected n.

    The result C has p(T^{n-1} C n C) = 0 for every selected n, which is
    verified exactly before returning.
    """
    A = np.asarray(A, dtype=bool)
    pA = system.measure(A)
    if pA == 0:
        raise ConstructionError("A must have positive measure")
    TA = system.shift(A, 1)
    if np.any(TA & A):
        raise ConstructionError("TA must be disjoint from A")
    allowance = budget * pA
    spent = Fraction(0)
    chosen, shifts = [], []
    m = 0
    while len(chosen) < count:
        m += 1
        if m > horizon or seq.available(m) < m:
            raise ConstructionError(
                f"only {len(chosen)} of {count} indices fit the budget within the horizon"
            )
        n = seq.term(m)
        d = system.measure(system.shift(A, n) ^ A)
        if spent + d <= allowance:
            spent += d
            chosen.append(m)
            shifts.append(n)
    C = TA.copy()
    for n in shifts:
        bad = system.shift(TA, n - 1) ^ A
        C &= ~system.shift(bad, -(n - 1))
    pC = system.measure(C)
    inter = [system.measure(system.shift(C, n - 1) & C) for n in shifts]
    if pC <= 0 or any(inter):
        raise InvariantViolation("constructed set fails the non-recurrence check")
    return NonRecurrentSet(C, chosen, shifts, pC, pA, spent, inter)


def from_spec(spec) -> RankOneSpec:
    """Tower specs: "chacon", {"preset": "infrankone", "seq": ...}, or explicit stages."""
    if isinstance(spec, str):
        spec = {"preset": spec}
    preset = spec.get("preset")
    if preset == "chacon":
        return chacon()
    if preset == "concat":
        return concatenation(int(spec.get("q", 2)), int(spec.get("h1", 1)))
    if preset in ("infrankone", "specialinfrankone"):
        from .sequences import from_spec as seq_spec
        seq = seq_spec(spec["seq"])
        fn = preset_infrankone if preset == "infrankone" else preset_specialinfrankone
        return fn(seq)
    if "stages" in spec:
        stages: Sequence = spec["stages"]
        last = stages[-1]

        def rule(m, start=int(spec.get("start", 1))):
            q, sp = stages[min(m - start, len(stages) - 1)] if stages else last
            return int(q), tuple(sp)

        return RankOneSpec(int(spec.get("h1", 1)), rule, int(spec.get("start", 1)), "explicit")
    raise ConstructionError(f"unknown tower spec {spec!r}")
