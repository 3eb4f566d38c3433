"""Far-field certification: residual of q0 in the t-equation and the x-domain error constants.

With ``G = sqrt(a/(2t)) q(t)`` the tail ``F = a x + b + G`` solves the Blasius
equation iff ``q`` solves

    q''' + (1 + q/(2t)) q'' + (-1/(2t) + 3/(4t^2) - q/(4t^2)) q'
         + (1/(2t^2) - 3/(4t^3)) q + q^2/(4t^3) = 0.

The error ``q - q0`` is controlled by constants ``C`` (taken as hypotheses):

    |E| <= C e^{-3t} / (9 t^{3/2}),   |E' - E/(2t)| <= C e^{-3t} / (3 t^{3/2}),
    |sqrt(t) E'' - E'/(2 sqrt t) + E/(2 t^{3/2})| <= C e^{-3t} / t.

The third combination is the one the chain rule produces for F'' in x; with
it the x-domain constants are exact images of C.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import interval as iv
from . import special
from .interval import DomainError, Enclosure
from .quasi import ALPHA_MAX, ALPHA_MIN, RHO0_FAMILY, MatchTriple, triple_polys

Q = Fraction

C_BASE = Q(16667, 10**8)
C_FAMILY = Q(16955, 10**8)
T_FAR_MIN = 1.96


@dataclass(frozen=True)
class FarResidual:
    t: Enclosure
    value: Enclosure
    normalized: Enclosure


def far_residual(t, c) -> FarResidual:
    """Residual of q0 in the t-equation, and ``R t^{3/2} e^{3t}``."""
    t = Enclosure.of(t)
    c = Enclosure.of(c)
    if t.lo < T_FAR_MIN:
        raise DomainError(f"t = {t} below {T_FAR_MIN}")
    if c.mag > 0.25:
        raise DomainError("far-field residual requires |c| <= 1/4")
    if c.lo == 0.0 and c.hi == 0.0:
        zero = Enclosure(0.0, 0.0)
        return FarResidual(t, zero, zero)
    q, q1, q2, q3 = special.q0_derivs(t, c, 3)
    t2 = t.sqr()
    t3 = t2 * t
    R = (
        q3
        + (1.0 + q / (2.0 * t)) * q2
        + (-1.0 / (2.0 * t) + 0.75 / t2 - q / (4.0 * t2)) * q1
        + (0.5 / t2 - 0.75 / t3) * q
        + q.sqr() / (4.0 * t3)
    )
    norm = R * iv.sqrt(t3) * iv.exp(3.0 * t)
    return FarResidual(t, R, norm)


@dataclass(frozen=True)
class FarErrorBounds:
    """Constants of the t-domain bounds for E, its first and second combinations."""

    C: Fraction

    def E(self, t) -> Enclosure:
        t = Enclosure.of(t)
        return Enclosure.of(self.C) * iv.exp(-3.0 * t) / (9.0 * iv.sqrt(t.sqr() * t))


@dataclass(frozen=True)
class XDomainBounds:
    """Constants k0, k1, k2 in ``|E| <= k0 t^-2 e^{-3t}``, ``|E'| <= k1 t^-3/2 e^{-3t}``,
    ``|E''| <= k2 t^-1 e^{-3t}`` in the x variable."""

    k0: float
    k1: float
    k2: float
    a_sup: float

    def bounds_at(self, t) -> tuple[float, float, float]:
        t = Enclosure.of(t)
        e = iv.exp(-3.0 * t)
        return (
            (self.k0 * e / t.sqr()).hi,
            (self.k1 * e / iv.sqrt(t.sqr() * t)).hi,
            (self.k2 * e / t).hi,
        )

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.k0, self.k1, self.k2)


def _constants(a: Enclosure, C: Fraction) -> tuple[Enclosure, Enclosure, Enclosure]:
    """``E = sqrt(a/(2t)) E_t``, ``dt/dx = sqrt(2 a t)``."""
    Ce = Enclosure.of(C)
    k0 = iv.sqrt(a * 0.5) * Ce / 9.0
    k1 = a * Ce / 3.0
    k2 = a * iv.sqrt(2.0 * a) * Ce
    return k0, k1, k2


def map_far_bounds_to_x(triple: MatchTriple, bounds: FarErrorBounds) -> XDomainBounds:
    """x-domain constants maximized over the corners of the trust-region box.

    Each constant is increasing in a, so the corner with the largest a attains it.
    """
    a_sup = max(Enclosure.of(a).hi for a, _, _ in triple.corners())
    k = _constants(Enclosure(a_sup, a_sup), bounds.C)
    return XDomainBounds(k[0].hi, k[1].hi, k[2].hi, a_sup)


def a_sup_family(rel_tol: float = 1e-12) -> float:
    """Rigorous ``sup_alpha a0(alpha) + rho0`` over the parameter interval."""
    pa, _, _ = triple_polys()
    _, ub = iv.branch_and_bound_max(
        lambda u, v: pa.enclose(Enclosure.of(u).union(Enclosure.of(v))),
        lambda x: float(pa(x)),
        ALPHA_MIN,
        ALPHA_MAX,
        rel_tol,
    )
    return (Enclosure.of(ub) + Enclosure.of(RHO0_FAMILY)).hi


def map_far_bounds_family(bounds: FarErrorBounds = FarErrorBounds(C_FAMILY)) -> XDomainBounds:
    a_sup = a_sup_family()
    k = _constants(Enclosure(a_sup, a_sup), bounds.C)
    return XDomainBounds(k[0].hi, k[1].hi, k[2].hi, a_sup)


def residual_grid(c, ts) -> list[FarResidual]:
    return [far_residual(t, c) for t in ts]
