"""The quasi-solution F0: exact inner polynomial and the far-field representation.

Inner piece on ``[0, 5/2]``::

    base:    F0(x)    = x^2/2 + x^4 P(2x/5)
    family:  F0(x; a) = a + x^2/2 + x^3 P(2x/5; 25a/3 + 1/2),   a in [-3/50, 3/50]

Outer piece, for ``t(x) = (a/2)(x + b/a)^2``::

    F0(x) = a x + b + sqrt(a / (2 t)) q0(t)
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources

from . import interval as iv
from . import special
from .interval import DomainError, Enclosure
from .poly import BiRationalPoly, RationalPoly

Q = Fraction

X_MATCH = Q(5, 2)
ALPHA_MIN, ALPHA_MAX = Q(-3, 50), Q(3, 50)
RHO0_BASE = Q(5, 10**5)
RHO0_FAMILY = Q(5, 10**4)
T_OUTER_MIN = 1.96


@lru_cache(maxsize=1)
def coefficient_data() -> dict:
    text = resources.files("blasius_cert").joinpath("data/coefficients.json").read_text()
    return json.loads(text)


def _q(pair) -> Fraction:
    return Q(pair[0], pair[1])


def base_p() -> list[Fraction]:
    return [_q(v) for v in coefficient_data()["base"]["p"]]


def family_p() -> list[list[Fraction]]:
    return [[_q(v) for v in row] for row in coefficient_data()["family"]["p"]]


def beta_of_alpha() -> RationalPoly:
    return RationalPoly([_q(v) for v in coefficient_data()["family"]["beta_of_alpha"]])


def triple_polys() -> tuple[RationalPoly, RationalPoly, RationalPoly]:
    t = coefficient_data()["triple"]
    return tuple(RationalPoly([_q(v) for v in t[k]]) for k in "abc")


def check_alpha(alpha) -> Fraction:
    alpha = Q(alpha)
    if not ALPHA_MIN <= alpha <= ALPHA_MAX:
        raise DomainError(f"alpha = {alpha} outside [-3/50, 3/50]")
    return alpha


@dataclass(frozen=True)
class InnerQuasi:
    """Exact inner quasi-solution with its first three derivatives."""

    poly: RationalPoly
    alpha: Fraction = Q(0)
    path: str = "base"
    d1: RationalPoly = field(init=False, repr=False, compare=False)
    d2: RationalPoly = field(init=False, repr=False, compare=False)
    d3: RationalPoly = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        d1 = self.poly.derivative()
        d2 = d1.derivative()
        object.__setattr__(self, "d1", d1)
        object.__setattr__(self, "d2", d2)
        object.__setattr__(self, "d3", d2.derivative())

    def values(self, x) -> tuple[Fraction, Fraction, Fraction]:
        """Exact ``(F0, F0', F0'')`` at a rational point."""
        x = Q(x)
        return self.poly(x), self.d1(x), self.d2(x)


@lru_cache(maxsize=1)
def base_inner_poly() -> RationalPoly:
    coeffs = [Q(0)] * 17
    coeffs[2] = Q(1, 2)
    for j, pj in enumerate(base_p()):
        coeffs[4 + j] += Q(2, 5 * (j + 2) * (j + 3) * (j + 4)) * pj * Q(2, 5) ** j
    return RationalPoly(coeffs)


@lru_cache(maxsize=1)
def family_inner_poly() -> BiRationalPoly:
    """``F0(x; alpha)`` as an exact polynomial in (x, alpha)."""
    beta = beta_of_alpha()
    beta_pows = [RationalPoly([1])]
    for _ in range(5):
        beta_pows.append(beta_pows[-1] * beta)
    rows = [RationalPoly()] * 17
    rows[0] = RationalPoly([0, 1])
    rows[2] = RationalPoly([Q(1, 2)])
    for i, prow in enumerate(family_p()):
        acc = RationalPoly()
        for j, pij in enumerate(prow):
            acc = acc + beta_pows[j] * pij
        rows[3 + i] = rows[3 + i] + acc * (Q(2, 5) ** i / ((i + 1) * (i + 2) * (i + 3)))
    return BiRationalPoly(rows)


def build_inner(alpha=0, path: str = "auto") -> InnerQuasi:
    """Inner quasi-solution. ``path='auto'`` uses the base polynomial for alpha = 0."""
    alpha = check_alpha(alpha)
    if path == "auto":
        path = "base" if alpha == 0 else "family"
    if path == "base":
        if alpha != 0:
            raise DomainError("the base polynomial is only defined for alpha = 0")
        return InnerQuasi(base_inner_poly(), Q(0), "base")
    if path == "family":
        return InnerQuasi(family_inner_poly().at_alpha(alpha), alpha, "family")
    raise ValueError(f"unknown path {path!r}")


# ---------------------------------------------------------------------------
# matching constants


@dataclass(frozen=True)
class MatchTriple:
    a: Enclosure
    b: Enclosure
    c: Enclosure
    rho0: Fraction
    center: tuple[Fraction, Fraction, Fraction] | None = None

    @property
    def box(self) -> "MatchTriple":
        """The enclosing box ``|a-a0| <= rho0, |b-b0| <= 2 rho0, |c-c0| <= 2 rho0``."""
        a0, b0, c0 = self.center
        r = self.rho0
        return MatchTriple(
            Enclosure.of(a0 - r).union(Enclosure.of(a0 + r)),
            Enclosure.of(b0 - 2 * r).union(Enclosure.of(b0 + 2 * r)),
            Enclosure.of(c0 - 2 * r).union(Enclosure.of(c0 + 2 * r)),
            r,
            self.center,
        )

    def weighted_distance(self, a, b, c) -> Enclosure:
        a0, b0, c0 = (Enclosure.of(v) for v in self.center)
        d = (Enclosure.of(a) - a0).sqr() + 0.25 * (Enclosure.of(b) - b0).sqr() + 0.25 * (
            Enclosure.of(c) - c0
        ).sqr()
        # a sum of squares; outward rounding may push lo below zero
        return iv.sqrt(Enclosure(max(0.0, d.lo), d.hi))

    def contains(self, a, b, c) -> bool:
        return self.weighted_distance(a, b, c).hi <= float(self.rho0)

    def corners(self):
        box = self.box
        for a in (box.a.lo, box.a.hi):
            for b in (box.b.lo, box.b.hi):
                for c in (box.c.lo, box.c.hi):
                    yield a, b, c


def nominal_triple(alpha=0, path: str = "auto") -> tuple[Fraction, Fraction, Fraction]:
    alpha = check_alpha(alpha)
    if path == "auto":
        path = "base" if alpha == 0 else "family"
    pa, pb, pc = triple_polys()
    return pa(alpha), pb(alpha), pc(alpha)


def initial_triple(alpha=0, path: str = "auto") -> MatchTriple:
    alpha = check_alpha(alpha)
    if path == "auto":
        path = "base" if alpha == 0 else "family"
    a0, b0, c0 = nominal_triple(alpha, path)
    rho0 = RHO0_BASE if path == "base" else RHO0_FAMILY
    return MatchTriple(Enclosure.of(a0), Enclosure.of(b0), Enclosure.of(c0), rho0, (a0, b0, c0))


# ---------------------------------------------------------------------------
# stretched variable


def t_of_x(x, a, b) -> Enclosure:
    a, b, x = (Enclosure.of(v) for v in (a, b, x))
    s = x + b / a
    return 0.5 * a * s.sqr()


def t_m_exact(a, b) -> Fraction:
    a, b = Q(a), Q(b)
    return a / 2 * (X_MATCH + b / a) ** 2


@dataclass(frozen=True)
class StretchedVar:
    t: Enclosure
    t_m: Enclosure


def t_m_bounds_base() -> Enclosure:
    """``(a_l/2 (5/2 + b_l/a_l)^2, a_r/2 (5/2 + b_r/a_r)^2)`` for the base trust region."""
    a0, b0, _ = nominal_triple(0, "base")
    r = RHO0_BASE
    lo = t_m_exact(a0 - r, b0 - 2 * r)
    hi = t_m_exact(a0 + r, b0 + 2 * r)
    return Enclosure(iv.lower(lo), iv.upper(hi))


def _tm_side(sign: int):
    pa, pb, _ = triple_polys()
    r = RHO0_FAMILY

    def exact(alpha):
        alpha = Q(alpha)
        return t_m_exact(pa(alpha) + sign * r, pb(alpha) + sign * 2 * r)

    def enclose(u, v):
        A = Enclosure.of(u).union(Enclosure.of(v))
        a = pa.enclose(A) + float(sign) * Enclosure.of(r)
        b = pb.enclose(A) + float(sign) * Enclosure.of(2 * r)
        return 0.5 * a * (Enclosure.of(X_MATCH) + b / a).sqr()

    return exact, enclose


def t_m_bounds_family(rel_tol: float = 1e-9) -> Enclosure:
    """Rigorous ``(inf_alpha t_{m,l}, sup_alpha t_{m,r})`` over ``[-3/50, 3/50]``."""
    ex_l, enc_l = _tm_side(-1)
    ex_r, enc_r = _tm_side(+1)
    _, lo = iv.branch_and_bound_min(enc_l, lambda a: float(ex_l(a)), ALPHA_MIN, ALPHA_MAX, rel_tol)
    _, hi = iv.branch_and_bound_max(enc_r, lambda a: float(ex_r(a)), ALPHA_MIN, ALPHA_MAX, rel_tol)
    return Enclosure(lo, hi)


# ---------------------------------------------------------------------------
# outer representation


def outer_from_q(x, a, b, q: list[Enclosure]) -> tuple[Enclosure, Enclosure, Enclosure]:
    """``(F, F', F'')`` from ``q, q', q''`` at ``t(x)``, via ``dt/dx = sqrt(2 a t)``."""
    a, b, x = (Enclosure.of(v) for v in (a, b, x))
    s = x + b / a
    t = 0.5 * a * s.sqr()
    q0, q1, q2 = q[:3]
    F = a * x + b + q0 / s
    F1 = a + a * (q1 - q0 / (2.0 * t))
    F2 = a * a * s * (q2 - q1 / (2.0 * t) + q0 / (2.0 * t.sqr()))
    return F, F1, F2


def f0_outer(x, triple: MatchTriple, t_min: float = T_OUTER_MIN) -> tuple[Enclosure, Enclosure, Enclosure]:
    """Enclosures of the outer ``F0, F0', F0''`` at x for the triple's (a, b, c)."""
    a, b, c = triple.a, triple.b, triple.c
    if a.lo <= 0.0:
        raise DomainError("outer representation needs a > 0")
    x = Enclosure.of(x)
    s = x + b / a
    if s.lo <= 0.0:
        raise DomainError("x lies left of the far-field branch point -b/a")
    t = t_of_x(x, a, b)
    if t.lo < t_min:
        raise DomainError(f"t(x) = {t} below {t_min}")
    if c.lo == 0.0 and c.hi == 0.0:
        zero = Enclosure(0.0, 0.0)
        return outer_from_q(x, a, b, [zero, zero, zero])
    return outer_from_q(x, a, b, special.q0_derivs(t, c, 2))
