"""Continued fractions with exact big-integer convergents.

A number alpha = [a0; a1, a2, ...] is described by its partial quotients.
Irrational inputs are given as an eventually periodic list or as a rule
``n -> a_n``; decimal strings are converted with interval arithmetic and
only the quotients that the interval determines are accepted.
"""
from __future__ import annotations

import threading
from fractions import Fraction
from math import floor
from typing import Callable, Sequence

from ._exact import dist_to_int_interval
from .errors import ConstructionError, PrecisionError


class ContinuedFraction:
    """alpha = a0 + 1/(a1 + 1/(a2 + ...)).

    Convergents follow the usual recurrence with p_{-1} = 1, q_{-1} = 0,
    p_0 = a0, q_0 = 1, so q_1 = a1 and q_{n+1} = a_{n+1} q_n + q_{n-1}.
    """

    def __init__(
        self,
        a0: int = 0,
        prefix: Sequence[int] = (),
        period: Sequence[int] = (),
        rule: Callable[[int], int] | None = None,
        known: int | None = None,
        label: str | None = None,
    ):
        self.a0 = int(a0)
        self.prefix = tuple(int(a) for a in prefix)
        self.period = tuple(int(a) for a in period)
        self.rule = rule
        # for decimal input: quotients beyond `known` are not determined
        self.known = known
        self.label = label
        if any(a < 1 for a in self.prefix + self.period):
            raise ConstructionError("partial quotients a_n (n >= 1) must be positive")
        if self.period and rule is not None:
            raise ConstructionError("give either a period or a rule, not both")
        self._p = [1, self.a0]
        self._q = [0, 1]
        self._lock = threading.Lock()

    # -- constructors -------------------------------------------------
    @classmethod
    def golden_mean(cls) -> "ContinuedFraction":
        """(sqrt 5 - 1)/2 = [0; 1, 1, 1, ...]."""
        return cls(0, (), (1,), label="golden")

    @classmethod
    def silver(cls) -> "ContinuedFraction":
        """sqrt 2 - 1 = [0; 2, 2, 2, ...]."""
        return cls(0, (), (2,), label="sqrt2-1")

    @classmethod
    def from_fraction(cls, x: Fraction) -> "ContinuedFraction":
        x = Fraction(x)
        a0 = floor(x)
        terms = []
        r = x - a0
        while r:
            r = 1 / r
            a = floor(r)
            terms.append(a)
            r -= a
        return cls(a0, terms, label=str(x))

    @classmethod
    def from_interval(cls, lo: Fraction, hi: Fraction, label=None) -> "ContinuedFraction":
        """Quotients shared by every real in [lo, hi]; the rest are unknown."""
        lo, hi = Fraction(lo), Fraction(hi)
        if hi < lo:
            lo, hi = hi, lo
        if floor(lo) != floor(hi):
            raise PrecisionError("interval does not determine the integer part", index=0)
        a0 = floor(lo)
        terms = []
        u, v = lo - a0, hi - a0
        while u and v:
            u, v = 1 / u, 1 / v
            au, av = floor(u), floor(v)
            if au != av:
                break
            terms.append(au)
            u, v = u - au, v - av
        # the last shared quotient can still change if an endpoint is exactly
        # a cylinder boundary; drop it to stay on the safe side
        if terms and (not u or not v):
            terms.pop()
        return cls(a0, terms, known=len(terms), label=label)

    @classmethod
    def from_decimal(cls, text: str) -> "ContinuedFraction":
        """Parse a decimal string, treating it as exact to half a unit in the last place."""
        text = text.strip()
        x = Fraction(text)
        digits = len(text.split(".", 1)[1]) if "." in text else 0
        half_ulp = Fraction(1, 2 * 10**digits)
        return cls.from_interval(x - half_ulp, x + half_ulp, label=text)

    @classmethod
    def from_spec(cls, spec) -> "ContinuedFraction":
        """Build from the JSON forms accepted by the CLI.

        ``"golden"``, ``"silver"``, a decimal string, a list ``[a0, a1, ...]``
        (finite) or ``{"a0":..,"prefix":[..],"period":[..]}``.
        """
        if isinstance(spec, ContinuedFraction):
            return spec
        if isinstance(spec, str):
            name = spec.strip().lower()
            if name in ("golden", "golden_mean", "phi"):
                return cls.golden_mean()
            if name in ("silver", "sqrt2-1"):
                return cls.silver()
            return cls.from_decimal(spec)
        if isinstance(spec, (list, tuple)):
            if not spec:
                raise ConstructionError("empty continued fraction")
            return cls(spec[0], spec[1:])
        if isinstance(spec, dict):
            if "decimal" in spec:
                return cls.from_decimal(str(spec["decimal"]))
            return cls(spec.get("a0", 0), spec.get("prefix", ()), spec.get("period", ()))
        raise ConstructionError(f"cannot read continued fraction from {spec!r}")

    def to_spec(self):
        if self.label in ("golden", "sqrt2-1"):
            return "golden" if self.label == "golden" else "silver"
        if self.rule is not None:
            return {"label": self.label or "rule"}
        return {"a0": self.a0, "prefix": list(self.prefix), "period": list(self.period)}

    # -- terms --------------------------------------------------------
    @property
    def length(self) -> int | None:
        """Number of partial quotients after a0 (None when infinite)."""
        if self.period or self.rule is not None:
            return None
        if self.known is not None:
            return None
        return len(self.prefix)

    @property
    def is_rational(self) -> bool:
        return self.length is not None

    def quotient(self, n: int) -> int:
        """a_n for n >= 1."""
        if n < 1:
            raise IndexError("partial quotients start at n = 1")
        if self.known is not None and n > self.known:
            raise PrecisionError(
                f"input precision does not determine partial quotient a_{n}", index=n
            )
        if n <= len(self.prefix):
            return self.prefix[n - 1]
        if self.period:
            return self.period[(n - 1 - len(self.prefix)) % len(self.period)]
        if self.rule is not None:
            a = int(self.rule(n))
            if a < 1:
                raise ConstructionError(f"rule produced a_{n} = {a} < 1")
            return a
        raise IndexError(f"rational continued fraction has only {len(self.prefix)} quotients")

    def _extend(self, n: int) -> None:
        with self._lock:
            while len(self._q) - 2 < n:
                k = len(self._q) - 1  # index of the convergent being built
                a = self.quotient(k)
                self._p.append(a * self._p[-1] + self._p[-2])
                self._q.append(a * self._q[-1] + self._q[-2])

    def convergent(self, n: int) -> tuple[int, int]:
        """(p_n, q_n)."""
        if n < 0:
            raise IndexError("convergents start at n = 0")
        self._extend(n)
        return self._p[n + 1], self._q[n + 1]

    def denominators(self, count: int) -> list[int]:
        """q_0, ..., q_{count-1}."""
        self._extend(count - 1)
        return self._q[1 : count + 1]

    # -- exact enclosures --------------------------------------------------
    def enclosure(self, n: int) -> tuple[Fraction, Fraction]:
        """Closed rational interval containing alpha, of width 1/(q_n q_{n+1})."""
        if self.length is not None and n >= self.length:
            p, q = self.convergent(self.length)
            return Fraction(p, q), Fraction(p, q)
        p0, q0 = self.convergent(n)
        p1, q1 = self.convergent(n + 1)
        a, b = Fraction(p0, q0), Fraction(p1, q1)
        return (a, b) if a <= b else (b, a)

    def _index_for(self, scale: int, bits: int) -> int:
        """Smallest k with q_k q_{k+1} >= scale * 2**bits (or the last index)."""
        target = scale << bits
        k = 0
        while True:
            if self.length is not None and k >= self.length:
                return k
            _, qk = self.convergent(k)
            _, qk1 = self.convergent(k + 1)
            if qk * qk1 >= target:
                return k
            k += 1

    def approximation(self, n: int, bits: int = 64) -> tuple[int, int, int]:
        """(P, Q, k): convergent P/Q = p_k/q_k with |n alpha - n P/Q| < 2**-bits."""
        k = self._index_for(max(1, abs(n)), bits)
        p, q = self.convergent(k)
        return p, q, k

    def norm_interval(self, n: int, bits: int = 64) -> tuple[Fraction, Fraction]:
        """Exact rational bracket of ||n alpha|| of width at most 2**-bits."""
        k = self._index_for(max(1, abs(n)), bits)
        lo, hi = self.enclosure(k)
        a, b = n * lo, n * hi
        if b < a:
            a, b = b, a
        return dist_to_int_interval(a, b)

    def __repr__(self):
        if self.label:
            return f"ContinuedFraction({self.label})"
        return f"ContinuedFraction({self.a0}; {list(self.prefix)} period={list(self.period)})"
