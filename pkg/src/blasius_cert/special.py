"""Enclosures of the far-field functions I0, J0, their derivatives, and q0.

``I0(t) = 1 - sqrt(pi t) exp(t) erfc(sqrt t) = 1/2 int_0^inf e^{-st} (1+s)^{-3/2} ds``
and ``J0(t) = I0(2t)``.  The scaled complementary error function is enclosed
with Laplace's continued fraction; because every partial numerator and
denominator is positive, evaluating it backwards with the unknown tail
replaced by its trivial bracket gives a rigorous two-sided bound.

Derivatives never go through numerical differentiation: ``y = 1 - I0``
satisfies ``2t y' = (2t + 1) y - 2t``, which yields a recurrence for its Taylor
coefficients.  Those coefficients are carried in :class:`Jet` objects.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

from . import interval as iv
from .interval import DomainError, Enclosure

T_MIN = 1.9
MAX_MOMENT = 6


class Jet:
    """Truncated Taylor expansion ``sum c[k] h^k`` with enclosure coefficients."""

    __slots__ = ("c",)

    def __init__(self, coeffs: Sequence):
        self.c = [Enclosure.of(x) for x in coeffs]

    @property
    def order(self) -> int:
        return len(self.c) - 1

    @classmethod
    def constant(cls, value, order: int) -> "Jet":
        return cls([value] + [0] * order)

    def __add__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            return Jet([self.c[0] + other] + self.c[1:])
        return Jet([a + b for a, b in zip(self.c, other.c)])

    __radd__ = __add__

    def __neg__(self) -> "Jet":
        return Jet([-a for a in self.c])

    def __sub__(self, other) -> "Jet":
        return self + (-other if isinstance(other, Jet) else -Enclosure.of(other))

    def __rsub__(self, other) -> "Jet":
        return (-self) + other

    def __mul__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            o = Enclosure.of(other)
            return Jet([a * o for a in self.c])
        n = min(self.order, other.order)
        out = []
        for k in range(n + 1):
            acc = Enclosure(0.0, 0.0)
            for i in range(k + 1):
                acc = acc + self.c[i] * other.c[k - i]
            out.append(acc)
        return Jet(out)

    __rmul__ = __mul__

    def derivatives(self) -> list[Enclosure]:
        """``[f, f', f'', ...]`` at the expansion point."""
        return [a * math.factorial(k) for k, a in enumerate(self.c)]

    def derivative(self, k: int) -> Enclosure:
        return self.c[k] * math.factorial(k)


def _check_t(t: Enclosure) -> Enclosure:
    t = Enclosure.of(t)
    if t.lo < T_MIN:
        raise DomainError(f"t = {t} below the supported domain t >= {T_MIN}")
    return t


def sqrt_pi_erfcx(x: Enclosure, width: float = 4e-16, max_depth: int = 20000) -> Enclosure:
    """Enclosure of ``sqrt(pi) * exp(x^2) * erfc(x)`` for ``x > 0``.

    Laplace continued fraction ``1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))``.
    """
    x = Enclosure.of(x)
    if x.lo <= 0.0:
        raise DomainError("continued fraction requires x > 0")
    depth = 32
    prev = math.inf
    while True:
        a_next = Enclosure.of(Fraction(depth + 1, 2))
        # tail after level `depth` lies in (x, x + a_{depth+1}/x)
        d = Enclosure(x.lo, (x + a_next / x).hi)
        for k in range(depth, 0, -1):
            d = x + Enclosure.of(Fraction(k, 2)) / d
        val = 1.0 / d
        w = val.width
        # stop at the target, or once rounding (not truncation) dominates the width
        if w <= width * max(val.mag, 1e-300) or w > 0.5 * prev or depth >= max_depth:
            return val
        prev = w
        depth *= 2


def _y_jet(t: Enclosure, order: int) -> Jet:
    """Taylor coefficients of ``y(t) = sqrt(pi t) e^t erfc(sqrt t)`` around t."""
    x = iv.sqrt(t)
    y0 = x * sqrt_pi_erfcx(x)
    ys = [y0]
    two_t = 2.0 * t
    for k in range(order):
        num = (two_t + (1 - 2 * k)) * ys[k]
        if k >= 1:
            num = num + 2.0 * ys[k - 1]
        if k == 0:
            num = num - two_t
        elif k == 1:
            num = num - 2.0
        ys.append(num / (two_t * (k + 1)))
    return Jet(ys)


def I0_jet(t, order: int = 3) -> Jet:
    t = _check_t(t)
    y = _y_jet(t, order)
    return Jet([1.0 - y.c[0]] + [-c for c in y.c[1:]])


def J0_jet(t, order: int = 3) -> Jet:
    """Jet of ``J0(t) = I0(2t)``; the chain rule scales coefficient k by 2^k."""
    t = _check_t(t)
    j = I0_jet(2.0 * t, order)
    return Jet([c * (2.0**k) for k, c in enumerate(j.c)])


def I0(t) -> Enclosure:
    return I0_jet(t, 0).c[0]


def J0(t) -> Enclosure:
    return J0_jet(t, 0).c[0]


def moment(k: int, base, t) -> Enclosure:
    """Enclosure of ``int_0^inf s^k e^{-st} (1 + base*s)^{-3/2} ds`` for base in {1, 1/2}."""
    if not isinstance(k, int) or k < 0 or k > MAX_MOMENT:
        raise DomainError(f"unsupported moment order {k}")
    base = Fraction(base)
    if base == 1:
        jet, scale = I0_jet(t, k), 2
    elif base == Fraction(1, 2):
        jet, scale = J0_jet(t, k), 4
    else:
        raise DomainError(f"unsupported base {base}")
    return jet.derivative(k) * ((-1) ** k * scale)


def exp_jet(t: Enclosure, rate: float, order: int) -> Jet:
    """Jet of ``exp(rate * t)``."""
    e = iv.exp(Enclosure.of(t) * rate)
    return Jet([e * (rate**k / math.factorial(k)) for k in range(order + 1)])


def sqrt_jet(t: Enclosure, order: int) -> Jet:
    """Jet of ``sqrt(t)``: coefficients ``binom(1/2, k) t^(1/2 - k)``."""
    t = Enclosure.of(t)
    s = iv.sqrt(t)
    out = [s]
    coef = Fraction(1)
    for k in range(1, order + 1):
        coef *= (Fraction(1, 2) - (k - 1)) / k
        out.append(Enclosure.of(coef) * s / t**k)
    return Jet(out)


def q0_jet(t, c, order: int = 3) -> Jet:
    """Jet of ``q0(t) = 2c sqrt(t) e^{-t} I0 + c^2 e^{-2t} (2 J0 - I0 - I0^2)``."""
    t = _check_t(t)
    c = Enclosure.of(c)
    if c.mag >= 0.25:
        raise DomainError("far-field series requires |c| < 1/4")
    i0 = I0_jet(t, order)
    j0 = J0_jet(t, order)
    first = 2.0 * sqrt_jet(t, order) * exp_jet(t, -1.0, order) * i0
    second = exp_jet(t, -2.0, order) * (2.0 * j0 - i0 - i0 * i0)
    return first * c + second * c.sqr()


def q0(t, c) -> Enclosure:
    return q0_jet(t, c, 0).c[0]


def q0_derivs(t, c, order: int = 3) -> list[Enclosure]:
    """``[q0, q0', q0'', q0''']`` (up to ``order``) at t."""
    return q0_jet(t, c, order).derivatives()
