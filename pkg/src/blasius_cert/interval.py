"""Outward-rounded interval arithmetic on IEEE doubles.

Every operation is computed in round-to-nearest and the result endpoints are
then pushed outward by one ulp (two for library transcendental functions), so
the returned interval always contains the exact real result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Union

Number = Union[int, float, Fraction]

_INF = math.inf


def _down(x: float, n: int = 1) -> float:
    for _ in range(n):
        x = math.nextafter(x, -_INF)
    return x


def _up(x: float, n: int = 1) -> float:
    for _ in range(n):
        x = math.nextafter(x, _INF)
    return x


def _sum_lo(x: float) -> float:
    # a float sum or difference that rounds to zero is exactly zero
    return x if x == 0.0 else _down(x)


def _sum_hi(x: float) -> float:
    return x if x == 0.0 else _up(x)


def _prod_lo(a: float, b: float) -> float:
    return 0.0 if a == 0.0 or b == 0.0 else _down(a * b)


def _prod_hi(a: float, b: float) -> float:
    return 0.0 if a == 0.0 or b == 0.0 else _up(a * b)


def _frac_lo(q: Fraction) -> float:
    f = float(q)
    return f if Fraction(f) <= q else _down(f)


def _frac_hi(q: Fraction) -> float:
    f = float(q)
    return f if Fraction(f) >= q else _up(f)


class DomainError(ValueError):
    """Raised when an operation is evaluated outside its certified domain."""


@dataclass(frozen=True)
class Enclosure:
    lo: float
    hi: float

    def __post_init__(self):
        if not (self.lo <= self.hi):
            raise ValueError(f"invalid enclosure [{self.lo}, {self.hi}]")

    # construction ---------------------------------------------------------
    @classmethod
    def of(cls, value: "Number | Enclosure") -> "Enclosure":
        """Tightest enclosure of an exact number (floats are taken as exact)."""
        if isinstance(value, Enclosure):
            return value
        if isinstance(value, float):
            return cls(value, value)
        q = Fraction(value)
        return cls(_frac_lo(q), _frac_hi(q))

    @classmethod
    def hull(cls, *values: "Number | Enclosure") -> "Enclosure":
        encs = [cls.of(v) for v in values]
        return cls(min(e.lo for e in encs), max(e.hi for e in encs))

    # properties -----------------------------------------------------------
    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def width(self) -> float:
        return _up(self.hi - self.lo)

    @property
    def mag(self) -> float:
        return max(abs(self.lo), abs(self.hi))

    @property
    def mig(self) -> float:
        if self.lo <= 0.0 <= self.hi:
            return 0.0
        return min(abs(self.lo), abs(self.hi))

    def contains(self, x: "Number | Enclosure") -> bool:
        if isinstance(x, Enclosure):
            return self.lo <= x.lo and x.hi <= self.hi
        if isinstance(x, float):
            return self.lo <= x <= self.hi
        q = Fraction(x)
        return Fraction(self.lo) <= q <= Fraction(self.hi)

    def __contains__(self, x) -> bool:
        return self.contains(x)

    def union(self, other: "Enclosure") -> "Enclosure":
        other = Enclosure.of(other)
        return Enclosure(min(self.lo, other.lo), max(self.hi, other.hi))

    def intersect(self, other: "Enclosure") -> "Enclosure":
        other = Enclosure.of(other)
        return Enclosure(max(self.lo, other.lo), min(self.hi, other.hi))

    def widen(self, amount: float) -> "Enclosure":
        return Enclosure(_down(self.lo - amount), _up(self.hi + amount))

    def __repr__(self) -> str:
        return f"Enclosure({self.lo!r}, {self.hi!r})"

    def to_json(self) -> list:
        return [self.lo, self.hi]

    # arithmetic -----------------------------------------------------------
    def __neg__(self) -> "Enclosure":
        return Enclosure(-self.hi, -self.lo)

    def __pos__(self) -> "Enclosure":
        return self

    def __add__(self, other) -> "Enclosure":
        o = Enclosure.of(other)
        return Enclosure(_sum_lo(self.lo + o.lo), _sum_hi(self.hi + o.hi))

    __radd__ = __add__

    def __sub__(self, other) -> "Enclosure":
        o = Enclosure.of(other)
        return Enclosure(_sum_lo(self.lo - o.hi), _sum_hi(self.hi - o.lo))

    def __rsub__(self, other) -> "Enclosure":
        return Enclosure.of(other) - self

    def __mul__(self, other) -> "Enclosure":
        o = Enclosure.of(other)
        pairs = ((self.lo, o.lo), (self.lo, o.hi), (self.hi, o.lo), (self.hi, o.hi))
        return Enclosure(min(_prod_lo(a, b) for a, b in pairs), max(_prod_hi(a, b) for a, b in pairs))

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Enclosure":
        o = Enclosure.of(other)
        if o.lo <= 0.0 <= o.hi:
            raise ZeroDivisionError("division by an enclosure containing zero")
        p = (self.lo / o.lo, self.lo / o.hi, self.hi / o.lo, self.hi / o.hi)
        return Enclosure(_down(min(p)), _up(max(p)))

    def __rtruediv__(self, other) -> "Enclosure":
        return Enclosure.of(other) / self

    def sqr(self) -> "Enclosure":
        if self.lo >= 0.0:
            return Enclosure(max(0.0, _prod_lo(self.lo, self.lo)), _prod_hi(self.hi, self.hi))
        if self.hi <= 0.0:
            return Enclosure(max(0.0, _prod_lo(self.hi, self.hi)), _prod_hi(self.lo, self.lo))
        m = max(-self.lo, self.hi)
        return Enclosure(0.0, _prod_hi(m, m))

    def __pow__(self, n: int) -> "Enclosure":
        if not isinstance(n, int) or n < 0:
            raise TypeError("only non-negative integer powers are supported")
        if n == 0:
            return Enclosure(1.0, 1.0)
        if n % 2 == 0:
            return self.sqr() ** (n // 2)
        return self * self ** (n - 1)

    def __abs__(self) -> "Enclosure":
        return Enclosure(self.mig, self.mag)

    # comparisons are certain: true only if they hold for every point
    def __lt__(self, other) -> bool:
        return self.hi < Enclosure.of(other).lo

    def __le__(self, other) -> bool:
        return self.hi <= Enclosure.of(other).lo

    def __gt__(self, other) -> bool:
        return self.lo > Enclosure.of(other).hi

    def __ge__(self, other) -> bool:
        return self.lo >= Enclosure.of(other).hi


def sqrt(x: "Enclosure | Number") -> Enclosure:
    x = Enclosure.of(x)
    if x.lo < 0.0:
        raise DomainError("sqrt of an enclosure with negative part")
    hi = 0.0 if x.hi == 0.0 else _up(math.sqrt(x.hi))
    return Enclosure(max(0.0, _down(math.sqrt(x.lo))), hi)


def exp(x: "Enclosure | Number") -> Enclosure:
    x = Enclosure.of(x)
    lo = math.exp(x.lo)
    hi = math.exp(x.hi)
    return Enclosure(max(0.0, _down(lo, 2)), _up(hi, 2))


def log(x: "Enclosure | Number") -> Enclosure:
    x = Enclosure.of(x)
    if x.lo <= 0.0:
        raise DomainError("log of a non-positive enclosure")
    return Enclosure(_down(math.log(x.lo), 2), _up(math.log(x.hi), 2))


def fsum_up(values) -> float:
    """Upper bound of a sum of floats."""
    return _up(math.fsum(values), 2)


def upper(q: Number | Enclosure) -> float:
    """A float that is >= the exact value."""
    return Enclosure.of(q).hi


def lower(q: Number | Enclosure) -> float:
    return Enclosure.of(q).lo


def branch_and_bound_max(
    enclose: Callable[[Fraction, Fraction], Enclosure],
    sample: Callable[[Fraction], float],
    lo: Fraction,
    hi: Fraction,
    rel_tol: float = 1e-6,
    max_boxes: int = 4000,
) -> tuple[float, float]:
    """Rigorous upper bound of ``max f`` over ``[lo, hi]``.

    ``enclose(u, v)`` must return an enclosure of the range of f on ``[u, v]``;
    ``sample(x)`` a (possibly approximate) value at a point, used only to prune.
    Returns ``(best_sample, certified_upper)``.
    """
    lo, hi = Fraction(lo), Fraction(hi)
    best = max(sample(lo), sample(hi), sample((lo + hi) / 2))
    work = [(lo, hi, enclose(lo, hi).hi)]
    certified = -_INF
    boxes = 0
    while work:
        work.sort(key=lambda w: w[2])
        u, v, ub = work.pop()
        boxes += 1
        tol = rel_tol * max(abs(best), 1e-300)
        if ub <= best + tol or boxes > max_boxes:
            certified = max(certified, ub)
            continue
        m = (u + v) / 2
        best = max(best, sample(m))
        work.append((u, m, enclose(u, m).hi))
        work.append((m, v, enclose(m, v).hi))
    return best, certified


def branch_and_bound_min(enclose, sample, lo, hi, rel_tol=1e-6, max_boxes=4000):
    """Rigorous lower bound of ``min f`` over ``[lo, hi]``; see :func:`branch_and_bound_max`."""
    best, cert = branch_and_bound_max(
        lambda u, v: -enclose(u, v), lambda x: -sample(x), lo, hi, rel_tol, max_boxes
    )
    return -best, -cert
