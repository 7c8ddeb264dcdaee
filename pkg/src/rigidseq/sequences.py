"""Increasing integer sequences: generators, combinators and growth profiles.

Every sequence is indexed from 1 and produces exact Python integers.  Terms
are memoized per instance behind a lock, so a sequence value can be shared
between threads.
"""
from __future__ import annotations

import heapq
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import mpmath

from .contfrac import ContinuedFraction
from .errors import ConstructionError, ResourceError

KINDS = (
    "powers",
    "integer_ratio_product",
    "polynomial",
    "perturbed_powers",
    "power_of_polynomial",
    "continued_fraction_denominators",
    "chacon_heights_minus_one",
    "linear_recurrence",
    "explicit",
    "union",
    "shifted",
    "rotation_hits",
)


def _poly(coeffs: Sequence[int], m: int) -> int:
    value = 0
    for c in reversed(coeffs):
        value = value * m + c
    return value


class IntSequence:
    """A lazily generated increasing sequence n_1 < n_2 < ... of positive integers.

    Build instances through the module-level constructors (``powers``,
    ``explicit``, ``union`` ...) rather than directly.
    """

    def __init__(self, kind: str, params: dict, generator: Callable[[int], int] | None,
                 length: int | None = None, stream: Callable[[], Iterable[int]] | None = None,
                 strict_from: int = 1):
        if kind not in KINDS:
            raise ConstructionError(f"unknown sequence kind {kind!r}")
        self.kind = kind
        self.params = params
        self._generator = generator
        self._stream = stream
        self._iter = None
        self.length = length
        # first index m from which n_{m+1} > n_m is enforced
        self.strict_from = strict_from
        self._terms: list[int] = []
        self._lock = threading.Lock()

    # -- access -------------------------------------------------------
    def _materialize(self, m: int) -> None:
        if self.length is not None and m > self.length:
            raise IndexError(f"{self.kind} sequence has only {self.length} terms")
        with self._lock:
            while len(self._terms) < m:
                k = len(self._terms) + 1
                if self._generator is not None:
                    value = int(self._generator(k))
                else:
                    if self._iter is None:
                        self._iter = iter(self._stream())
                    try:
                        value = int(next(self._iter))
                    except StopIteration:
                        self.length = len(self._terms)
                        raise IndexError(f"{self.kind} sequence has only {self.length} terms")
                if value < 1:
                    raise ConstructionError(f"{self.kind}: term n_{k} = {value} is not positive")
                if self._terms and k > self.strict_from and value <= self._terms[-1]:
                    raise ConstructionError(
                        f"{self.kind}: not increasing at m={k} ({self._terms[-1]} -> {value})"
                    )
                self._terms.append(value)

    def term(self, m: int) -> int:
        """n_m (m >= 1)."""
        if m < 1:
            raise IndexError("sequence indices start at 1")
        self._materialize(m)
        return self._terms[m - 1]

    def __getitem__(self, m: int) -> int:
        return self.term(m)

    def terms(self, count: int, start: int = 1) -> list[int]:
        """n_start, ..., n_{start+count-1} (fewer if the sequence is finite)."""
        stop = start + count - 1
        if self.length is not None:
            stop = min(stop, self.length)
        if stop < start:
            return []
        self._materialize(stop)
        return self._terms[start - 1 : stop]

    def available(self, m: int) -> int:
        """How many of the first m terms exist."""
        if self.length is not None:
            return min(m, self.length)
        try:
            self._materialize(m)
        except IndexError:
            return self.length or 0
        return m

    def iter_upto(self, bound: int):
        """Yield terms n_m <= bound in order."""
        m = 1
        while True:
            if self.length is not None and m > self.length:
                return
            try:
                t = self.term(m)
            except IndexError:
                return
            if t > bound:
                return
            yield t
            m += 1

    def count_upto(self, bound: int) -> int:
        """#({n_m} intersected with [1, bound]); repeated values count once."""
        return len(set(self.iter_upto(bound)))

    def to_spec(self) -> dict:
        spec = {"kind": self.kind}
        for key, value in self.params.items():
            if isinstance(value, IntSequence):
                spec[key] = value.to_spec()
            elif isinstance(value, (list, tuple)) and value and isinstance(value[0], IntSequence):
                spec[key] = [v.to_spec() for v in value]
            elif isinstance(value, ContinuedFraction):
                spec[key] = value.to_spec()
            else:
                spec[key] = value
        return spec

    def __repr__(self):
        return f"IntSequence({self.to_spec()})"


# -- generators ----------------------------------------------------------

def powers(a: int) -> IntSequence:
    """n_m = a**m."""
    a = int(a)
    if a < 2:
        raise ConstructionError(f"powers(a) needs a >= 2, got {a}")
    return IntSequence("powers", {"a": a}, lambda m: a**m)


def integer_ratio_product(ratios: Sequence[int] | None = None,
                          affine: tuple[int, int] | None = None) -> IntSequence:
    """n_m = rho_1 * ... * rho_m, with every rho_k (k >= 2) an integer >= 2.

    ``rho_1 = n_1`` may be 1.  Give the ratios as a finite list or as an
    affine rule ``rho_k = affine[0]*k + affine[1]`` (``(1, 0)`` gives m!).
    """
    if (ratios is None) == (affine is None):
        raise ConstructionError("give exactly one of ratios or affine")
    if ratios is not None:
        rs = [int(r) for r in ratios]
        if not rs:
            raise ConstructionError("empty ratio list")
        rule = lambda k: rs[k - 1]
        length = len(rs)
        params = {"ratios": rs}
    else:
        u, v = (int(x) for x in affine)
        rule = lambda k: u * k + v
        length = None
        params = {"affine": [u, v]}
        if u < 0 or (u == 0 and v < 2):
            raise ConstructionError("affine ratio rule must stay >= 2")
    first = rule(1)
    if first < 1:
        raise ConstructionError(f"n_1 = rho_1 must be positive, got {first}")
    check_to = length if length is not None else 2
    for k in range(2, check_to + 1):
        if rule(k) < 2:
            raise ConstructionError(f"ratio rho_{k} = {rule(k)} < 2")

    def stream():
        n = 1
        k = 1
        while length is None or k <= length:
            r = rule(k)
            if k >= 2 and r < 2:
                raise ConstructionError(f"ratio rho_{k} = {r} < 2")
            n *= r
            yield n
            k += 1

    seq = IntSequence("integer_ratio_product", params, None, length=length, stream=stream)
    seq.ratio_rule = rule
    return seq


def factorials() -> IntSequence:
    """n_m = m!."""
    return integer_ratio_product(affine=(1, 0))


def polynomial(coeffs: Sequence[int]) -> IntSequence:
    """n_m = c_0 + c_1 m + c_2 m**2 + ..."""
    cs = [int(c) for c in coeffs]
    if not cs or all(c == 0 for c in cs[1:]):
        raise ConstructionError("polynomial must be non-constant")
    return IntSequence("polynomial", {"coeffs": cs}, lambda m: _poly(cs, m))


def squares() -> IntSequence:
    return polynomial([0, 0, 1])


def perturbed_powers(a: int, coeffs: Sequence[int]) -> IntSequence:
    """n_m = a**m + p(m)."""
    a = int(a)
    if a < 2:
        raise ConstructionError(f"perturbed_powers needs a >= 2, got {a}")
    cs = [int(c) for c in coeffs]
    return IntSequence("perturbed_powers", {"a": a, "coeffs": cs}, lambda m: a**m + _poly(cs, m))


def power_of_polynomial(a: int, coeffs: Sequence[int]) -> IntSequence:
    """n_m = a**p(m), e.g. ``power_of_polynomial(2, [0, 0, 1])`` is 2**(m*m)."""
    a = int(a)
    if a < 2:
        raise ConstructionError(f"power_of_polynomial needs a >= 2, got {a}")
    cs = [int(c) for c in coeffs]
    if _poly(cs, 1) < 0:
        raise ConstructionError("exponent polynomial must be non-negative")
    return IntSequence("power_of_polynomial", {"a": a, "coeffs": cs}, lambda m: a ** _poly(cs, m))


def continued_fraction_denominators(alpha) -> IntSequence:
    """n_m = q_{m-1}, the denominators of the convergents of alpha.

    q_0 = q_1 = 1 when a_1 = 1, so strict growth is enforced only from m = 2.
    """
    cf = ContinuedFraction.from_spec(alpha)
    return IntSequence(
        "continued_fraction_denominators", {"alpha": cf},
        lambda m: cf.convergent(m - 1)[1], strict_from=2,
    )


def chacon_heights_minus_one() -> IntSequence:
    """n_m = (3**(m+1) - 1)/2 - 1: one less than the Chacon tower heights."""
    return IntSequence("chacon_heights_minus_one", {}, lambda m: (3 ** (m + 1) - 1) // 2 - 1)


def linear_recurrence(coeffs: Sequence[int], initial: Sequence[int]) -> IntSequence:
    """n_{m+K} = c_1 n_{m+K-1} + ... + c_K n_m, seeded by K initial terms."""
    cs = [int(c) for c in coeffs]
    init = [int(x) for x in initial]
    if len(cs) != len(init) or not cs:
        raise ConstructionError("need as many initial terms as coefficients")

    def stream():
        window = list(init)
        yield from window
        while True:
            nxt = sum(c * x for c, x in zip(cs, reversed(window)))
            yield nxt
            window = window[1:] + [nxt]

    return IntSequence("linear_recurrence", {"coeffs": cs, "initial": init}, None, stream=stream)


def fibonacci() -> IntSequence:
    """1, 2, 3, 5, 8, ... (the strictly increasing part)."""
    return linear_recurrence([1, 1], [1, 2])


def explicit(values: Iterable[int]) -> IntSequence:
    """A finite sequence from a list, validated eagerly."""
    vals = [int(v) for v in values]
    if not vals:
        raise ConstructionError("explicit sequence is empty")
    for i, v in enumerate(vals):
        if v < 1:
            raise ConstructionError(f"explicit: term {i + 1} = {v} is not positive")
        if i and v <= vals[i - 1]:
            raise ConstructionError(f"explicit: not increasing at m={i + 1}")
    return IntSequence("explicit", {"values": vals}, lambda m: vals[m - 1], length=len(vals))


def shifted(base: IntSequence, k: int) -> IntSequence:
    """n_m = base_m + k."""
    k = int(k)
    return IntSequence("shifted", {"base": base, "k": k}, lambda m: base.term(m) + k,
                       length=base.length, strict_from=base.strict_from)


def union(parts: Sequence[IntSequence]) -> IntSequence:
    """Sorted merge of several sequences with duplicates removed."""
    parts = list(parts)
    if not parts:
        raise ConstructionError("union of no sequences")

    def stream():
        heap = []
        for idx, seq in enumerate(parts):
            try:
                heap.append((seq.term(1), idx, 1))
            except IndexError:
                pass
        heapq.heapify(heap)
        last = None
        while heap:
            value, idx, m = heapq.heappop(heap)
            try:
                heapq.heappush(heap, (parts[idx].term(m + 1), idx, m + 1))
            except IndexError:
                pass
            if value != last:
                yield value
                last = value

    length = None
    if all(p.length is not None for p in parts):
        length = len(set().union(*(p.terms(p.length) for p in parts)))
    return IntSequence("union", {"parts": parts}, None, length=length, stream=stream)


def from_spec(spec) -> IntSequence:
    """Build a sequence from its JSON description ``{"kind": ..., params}``."""
    if isinstance(spec, IntSequence):
        return spec
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConstructionError(f"sequence spec needs a 'kind' field: {spec!r}")
    kind = spec["kind"]
    try:
        if kind == "powers":
            return powers(spec["a"])
        if kind == "integer_ratio_product":
            if "affine" in spec:
                return integer_ratio_product(affine=tuple(spec["affine"]))
            return integer_ratio_product(ratios=spec["ratios"])
        if kind == "factorials":
            return factorials()
        if kind == "polynomial":
            return polynomial(spec["coeffs"])
        if kind == "perturbed_powers":
            return perturbed_powers(spec["a"], spec.get("coeffs", [0]))
        if kind == "power_of_polynomial":
            return power_of_polynomial(spec["a"], spec["coeffs"])
        if kind == "continued_fraction_denominators":
            return continued_fraction_denominators(spec["alpha"])
        if kind == "chacon_heights_minus_one":
            return chacon_heights_minus_one()
        if kind == "linear_recurrence":
            return linear_recurrence(spec["coeffs"], spec["initial"])
        if kind == "fibonacci":
            return fibonacci()
        if kind == "explicit":
            return explicit(spec["values"])
        if kind == "shifted":
            return shifted(from_spec(spec["base"]), spec["k"])
        if kind == "union":
            return union([from_spec(p) for p in spec["parts"]])
    except KeyError as exc:
        raise ConstructionError(f"sequence kind {kind!r} is missing field {exc.args[0]!r}") from None
    raise ConstructionError(f"unknown sequence kind {kind!r}")


# -- analysis ------------------------------------------------------------

def density(seq: IntSequence, N: int) -> Fraction:
    """D(N, n) = #({n_m} in [1, N]) / N, exactly."""
    N = int(N)
    if N < 1:
        raise ValueError("density needs N >= 1")
    return Fraction(seq.count_upto(N), N)


def finite_sums(seq: IntSequence, lo: int, hi: int, cap: int | None = None,
                budget: int = 1 << 22) -> list[int]:
    """All sums of non-empty subsets of {n_lo, ..., n_hi} (distinct indices), each <= cap."""
    if lo > hi:
        raise ValueError("finite_sums needs lo <= hi")
    sums: set[int] = set()
    for t in seq.terms(hi - lo + 1, start=lo):
        new = {s + t for s in sums}
        new.add(t)
        if cap is not None:
            new = {s for s in new if s <= cap}
        sums |= new
        if len(sums) > budget:
            raise ResourceError(f"finite_sums exceeded budget of {budget} values",
                                partial=sorted(sums))
    return sorted(sums)


def gaps(seq: IntSequence, horizon: int) -> list[int]:
    """n_{m+1} - n_m for m = 1 .. horizon-1."""
    ts = seq.terms(horizon)
    return [b - a for a, b in zip(ts, ts[1:])]


@dataclass
class GrowthReport:
    """Finite-horizon growth profile of a sequence.

    ``liminf_ratio_estimate`` is the smallest ratio over the second half of
    the horizon; it is evidence, not a limit.
    """

    horizon: int
    density_samples: list[tuple[int, Fraction]]
    min_tail_gap: int
    tail_window: tuple[int, int]
    inf_ratio: Fraction
    liminf_ratio_estimate: Fraction
    gap_divergence: bool
    sidon_constant: float
    sidon_density_flag: bool
    notes: list[str] = field(default_factory=list)


def gap_divergence(seq: IntSequence, horizon: int) -> tuple[bool, int]:
    """Evidence that n_{m+1} - n_m -> infinity.

    The gaps are split into four consecutive windows; the answer is True
    when the minimum gap strictly increases from window to window.  Returns
    the verdict and the minimum gap over the last window.
    """
    g = gaps(seq, horizon)
    if len(g) < 4:
        raise ValueError("gap_divergence needs a horizon of at least 5 terms")
    q = len(g) // 4
    cuts = [0, q, 2 * q, 3 * q, len(g)]
    mins = [min(g[cuts[i]:cuts[i + 1]]) for i in range(4)]
    ok = all(a < b for a, b in zip(mins, mins[1:]))
    return ok, mins[-1]


def _ratio_stats(ts: list[int]) -> tuple[Fraction, Fraction]:
    ratios = [Fraction(b, a) for a, b in zip(ts, ts[1:])]
    tail = ratios[len(ratios) // 2:] or ratios
    return min(ratios), min(tail)


def growth_report(seq: IntSequence, N_samples: Sequence[int], horizon: int,
                  tail: int = 1, sidon_C: float = 1.0) -> GrowthReport:
    """Density samples, tail gaps and ratio statistics over a finite horizon.

    The tail window covers the last ``tail`` gaps n_{m+1} - n_m with
    m in [horizon - tail, horizon - 1].  ``sidon_density_flag`` is True when
    some sample has D(N) > C log N / N, i.e. the Sidon density bound fails.
    """
    if horizon < 2:
        raise ValueError("growth_report needs horizon >= 2")
    horizon = seq.available(horizon)
    ts = seq.terms(horizon)
    samples = [(int(N), density(seq, int(N))) for N in N_samples]
    tail = max(1, min(tail, horizon - 1))
    g = [b - a for a, b in zip(ts, ts[1:])]
    window = g[-tail:]
    inf_ratio, liminf_est = _ratio_stats(ts)
    div = gap_divergence(seq, horizon)[0] if horizon >= 5 else False
    flag = False
    with mpmath.workprec(128):
        for N, D in samples:
            if N >= 2 and int(D * N) > sidon_C * mpmath.log(N):
                flag = True
    notes = []
    if not div:
        notes.append("gap divergence fails over the horizon")
    return GrowthReport(
        horizon=horizon,
        density_samples=samples,
        min_tail_gap=min(window),
        tail_window=(horizon - tail, horizon - 1),
        inf_ratio=inf_ratio,
        liminf_ratio_estimate=liminf_est,
        gap_divergence=div,
        sidon_constant=sidon_C,
        sidon_density_flag=flag,
        notes=notes,
    )
