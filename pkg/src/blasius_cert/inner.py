"""Certification on the inner interval [0, 5/2].

Pipeline per cell ``[x_l, x_r]``:

1. residual ``R = F0''' + F0 F0''`` bounded exactly (cubic head + tail, or
   Chebyshev l1);
2. energy bounds M, M1, M2, M3 on the resolvent of
   ``L[phi] = phi''' + F0 phi'' + F0'' phi``;
3. a ball ``||E''|| <= eps`` on which the error integral equation maps into
   itself contractively, giving bounds for E, E', E'' and the data handed on to
   the next cell.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from . import interval as iv
from .interval import Enclosure
from .poly import (
    BiRationalPoly,
    RangeBound,
    RationalPoly,
    abs_sup_bound,
    exact_range,
    chebyshev_l1,
    isolate_sign_changes,
    positive_part_integral,
    range_bound,
    range_bound_cubic_tail,
)
from .quasi import ALPHA_MAX, ALPHA_MIN, X_MATCH, InnerQuasi, family_inner_poly

Q = Fraction

X_C = Q(1322040, 10**6)
BASE_BREAKPOINTS = (
    Q(0), Q(1, 16), Q(1, 8), Q(1, 4), Q(3, 8), Q(1, 2), Q(3, 4), Q(1),
    X_C, Q(3, 2), Q(7, 4), Q(2), Q(9, 4), Q(12, 5), X_MATCH,
)
BASE_REGIONS = ((Q(0), X_C), (X_C, Q(2)), (Q(2), X_MATCH))
FAMILY_BREAKPOINTS = (Q(0), Q(5, 4), Q(7, 5), Q(2), X_MATCH)
# ball radii tried first on the family cells
FAMILY_EPS = (Q(5, 10**6), Q(7, 10**7), Q(3, 10**6), Q(4, 10**6))


class CertificationError(RuntimeError):
    """A cell could not be certified."""


@dataclass(frozen=True)
class SubintervalPartition:
    breakpoints: tuple[Fraction, ...]

    def __post_init__(self):
        bp = tuple(Q(b) for b in self.breakpoints)
        object.__setattr__(self, "breakpoints", bp)
        if any(b <= a for a, b in zip(bp, bp[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        if bp[0] != 0 or bp[-1] != X_MATCH:
            raise ValueError("partition must cover [0, 5/2]")

    @property
    def cells(self) -> list[tuple[Fraction, Fraction]]:
        return list(zip(self.breakpoints, self.breakpoints[1:]))

    def cells_in(self, lo, hi) -> list[tuple[Fraction, Fraction]]:
        return [c for c in self.cells if c[0] >= lo and c[1] <= hi]


BASE_PARTITION = SubintervalPartition(BASE_BREAKPOINTS)
FAMILY_PARTITION = SubintervalPartition(FAMILY_BREAKPOINTS)


# ---------------------------------------------------------------------------
# residual


def residual_poly(inner: InnerQuasi) -> RationalPoly:
    return inner.d3 + inner.poly * inner.d2


@lru_cache(maxsize=1)
def residual_family() -> BiRationalPoly:
    F = family_inner_poly()
    F2 = F.deriv_x().deriv_x()
    return F2.deriv_x() + F * F2


@dataclass
class ResidualCert:
    method: str
    regions: dict[tuple[Fraction, Fraction], Enclosure]
    cells: list[RangeBound] = field(default_factory=list)
    l1: dict[tuple[Fraction, Fraction], Fraction] = field(default_factory=dict)

    @property
    def global_sup(self) -> float:
        return max(e.mag for e in self.regions.values())


def certify_residual(
    R: RationalPoly,
    partition: SubintervalPartition = BASE_PARTITION,
    method: str = "taylor_cells",
    regions: Sequence[tuple] = BASE_REGIONS,
    refine: bool = False,
) -> ResidualCert:
    """Certified brackets of R on each region (a union of partition cells).

    ``taylor_cells`` bounds each partition cell by its cubic head plus tail;
    with ``refine`` the cells are bisected adaptively first.
    """
    if method == "taylor_cells":
        if refine:
            cells = []
            for a, b in partition.cells:
                e = range_bound(R, a, b, rel_tol=1e-3)
                cells.append(RangeBound((a, b), e, e, Q(0)))
        else:
            cells = [range_bound_cubic_tail(R, c) for c in partition.cells]
        out = {}
        for lo, hi in regions:
            inside = [cb for cb in cells if cb.cell[0] >= lo and cb.cell[1] <= hi]
            if not inside:
                raise ValueError(f"region [{lo}, {hi}] is not a union of partition cells")
            out[(Q(lo), Q(hi))] = Enclosure(min(c.lo for c in inside), max(c.hi for c in inside))
        return ResidualCert(method, out, cells)
    if method == "chebyshev_l1":
        # l1 norm of the Chebyshev coefficients on every partition cell; a
        # region is bounded by the largest cell norm inside it
        l1 = {c: chebyshev_l1(R, c) for c in partition.cells}
        out = {}
        bps = set(partition.breakpoints)
        for lo, hi in regions:
            if Q(lo) not in bps or Q(hi) not in bps:
                raise ValueError(f"region [{lo}, {hi}] is not a union of partition cells")
            inside = [s for c, s in l1.items() if c[0] >= lo and c[1] <= hi]
            v = iv.upper(max(inside))
            out[(Q(lo), Q(hi))] = Enclosure(-v, v)
        return ResidualCert(method, out, [], l1)
    raise ValueError(f"unknown method {method!r}")


def _abs_sup(p: RationalPoly, lo, hi) -> float:
    return abs_sup_bound(p, lo, hi, rel_tol=1e-3)[1]


def _sampled_sup(p: RationalPoly, lo, hi, n: int = 257) -> float:
    lo, hi = float(lo), float(hi)
    c = [float(v) for v in reversed(p.coeffs)]
    best = 0.0
    for k in range(n):
        x = lo + (hi - lo) * k / (n - 1)
        acc = 0.0
        for v in c:
            acc = acc * x + v
        best = max(best, abs(acc))
    return best


@lru_cache(maxsize=32)
def residual_sup_family(
    cell: tuple, alphas: tuple = (ALPHA_MIN, ALPHA_MAX), rel_tol: float = 0.01, max_pieces: int = 256
) -> tuple[float, float, int]:
    """``sup |R(x; alpha)|`` over ``cell x alphas``.

    On an alpha-piece of half-width h around m::

        |R(x, alpha)| <= max(|R(x,m) + h R_a(x,m)|, |R(x,m) - h R_a(x,m)|) + h^2/2 sup |R_aa|

    and each x-polynomial is bounded exactly.  Pieces are bisected until the
    certified bound is within ``rel_tol`` of the sampled maximum.
    Returns ``(certified_upper, sampled_lower, pieces)``.
    """
    xl, xr = Q(cell[0]), Q(cell[1])
    R = residual_family()
    Ra = R.deriv_alpha()
    Raa = Ra.deriv_alpha()
    xs = [(xl + (xr - xl) * k / 8, xl + (xr - xl) * (k + 1) / 8) for k in range(8)]

    def piece(u, v):
        m, h = (u + v) / 2, (v - u) / 2
        r0, r1 = R.at_alpha(m), Ra.at_alpha(m)
        lin = max(_abs_sup(r0 + r1 * h, xl, xr), _abs_sup(r0 - r1 * h, xl, xr))
        curv = max(Raa.sup_abs_bound(x, (u, v)) for x in xs)
        ub = (Enclosure(0.0, lin) + Enclosure.of(curv * h * h / 2)).hi
        return ub, _sampled_sup(r0, xl, xr)

    a0, a1 = Q(alphas[0]), Q(alphas[1])
    ub, lower = piece(a0, a1)
    lower = max(lower, _sampled_sup(R.at_alpha(a0), xl, xr), _sampled_sup(R.at_alpha(a1), xl, xr))
    work = [(ub, a0, a1)]
    while len(work) < max_pieces:
        work.sort()
        ub, u, v = work[-1]
        if ub <= (1 + rel_tol) * lower:
            break
        work.pop()
        m = (u + v) / 2
        for p, q in ((u, m), (m, v)):
            b, s = piece(p, q)
            lower = max(lower, s)
            work.append((b, p, q))
    return max(w[0] for w in work), lower, len(work)


# ---------------------------------------------------------------------------
# coefficient brackets


def certify_coefficients(inner: InnerQuasi, split=Q(1, 8)) -> dict:
    """Brackets of F0, F0', F0'' on ``[0, split]`` and ``[split, 5/2]``."""
    out = {}
    for name, p in (("F0", inner.poly), ("F0'", inner.d1), ("F0''", inner.d2)):
        for lo, hi in ((Q(0), Q(split)), (Q(split), X_MATCH)):
            out[(name, lo, hi)] = exact_range(p, lo, hi)
    return out


# ---------------------------------------------------------------------------
# energy bounds


@dataclass(frozen=True)
class EnergyBounds:
    M: Enclosure
    M1: Enclosure
    M2: Enclosure
    M3: Enclosure
    cell: tuple[Fraction, Fraction]
    branch_brackets: int = 0
    rigorous: bool = True

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.M.hi, self.M1.hi, self.M2.hi, self.M3.hi)


def _weight(cell_lo: Fraction) -> RationalPoly:
    """``(y - x_l)^4 / 4``."""
    return RationalPoly([-cell_lo, 1]) ** 4 * Q(1, 4)


def _branch_parts(F: RationalPoly, F2: RationalPoly):
    """Branch-switching functions whose positive parts enter Q1, Q2 and Q."""
    return {"Q1": 2 * F2 - 2 * F, "Q2": F2 - 2 * F, "Q": F2 - 2 * F + 1}


def energy_bounds(inner: InnerQuasi, cell: tuple, tol=Q(1, 10**12)) -> EnergyBounds:
    """Upper bounds for M = ||G||, M_j = sup |Phi_j''| on ``cell`` for fixed alpha."""
    xl, xr = Q(cell[0]), Q(cell[1])
    if not (0 <= xl < xr <= X_MATCH):
        raise ValueError(f"cell [{xl}, {xr}] not inside [0, 5/2]")
    F, F1, F2 = inner.poly, inner.d1, inner.d2
    W = (_weight(xl) * F2).integrate(xl, xr)
    integrals, brackets = {}, 0
    for name, g in _branch_parts(F, F2).items():
        integrals[name] = W + positive_part_integral(g, xl, xr, tol)
        brackets += len(isolate_sign_changes(g, (xl, xr), Q(1, 10**9)))
    A1 = F1(xr) - F1(xl)
    A2 = (RationalPoly([-xl, 1]) ** 2 * F2).integrate(xl, xr)
    return _assemble(xl, xr, A1, A2, integrals, brackets)


def _assemble(xl, xr, A1, A2, integrals, brackets, rigorous=True) -> EnergyBounds:
    half = lambda v: iv.exp(Enclosure.of(v) * 0.5)  # noqa: E731
    e_q1 = half(integrals["Q1"])
    M1 = iv.sqrt(Enclosure.of(max(A1, Q(0)))) * e_q1
    M2 = iv.sqrt(Enclosure.of(max(A2, Q(0)))) * e_q1
    M3 = half(integrals["Q2"])
    M = iv.sqrt(Enclosure.of(xr - xl)) * half(integrals["Q"])
    return EnergyBounds(M, M1, M2, M3, (xl, xr), brackets, rigorous)


class _FamilyCell:
    """Exact alpha-polynomial pieces of the energy bounds on one x-cell."""

    def __init__(self, cell, x_pieces: int = 8):
        self.xl, self.xr = Q(cell[0]), Q(cell[1])
        F = family_inner_poly()
        F1 = F.deriv_x()
        F2 = F1.deriv_x()
        self.F, self.F2 = F, F2
        wx = BiRationalPoly.from_x_poly(_weight(self.xl))
        self.W = (wx * F2).integrate_x(self.xl, self.xr)
        self.A1 = F1.at_x(self.xr) - F1.at_x(self.xl)
        self.A2 = (BiRationalPoly.from_x_poly(RationalPoly([-self.xl, 1]) ** 2) * F2).integrate_x(
            self.xl, self.xr
        )
        self.g = {
            "Q1": F2 * 2 - F * 2,
            "Q2": F2 - F * 2,
            "Q": F2 - F * 2 + 1,
        }
        self.dg = {k: v.deriv_alpha() for k, v in self.g.items()}
        h = (self.xr - self.xl) / x_pieces
        self.x_pieces = [(self.xl + k * h, self.xl + (k + 1) * h) for k in range(x_pieces)]
        self._pos_cache: dict = {}

    def positive_integral(self, name, alpha) -> Fraction:
        key = (name, alpha)
        if key not in self._pos_cache:
            g = self.g[name].at_alpha(alpha)
            self._pos_cache[key] = positive_part_integral(g, self.xl, self.xr)
        return self._pos_cache[key]

    def lipschitz(self, name, u, v) -> Fraction:
        """Bound of ``int_xl^xr sup_{alpha in [u,v]} |d g / d alpha| dy``."""
        dg = self.dg[name]
        return sum(((b - a) * dg.sup_abs_bound((a, b), (u, v)) for a, b in self.x_pieces), Q(0))

    def integral_upper(self, name, u, v) -> float:
        """Upper bound of ``int Q_name`` for every alpha in [u, v]."""
        m = (u + v) / 2
        w = range_bound(self.W, u, v, rel_tol=1e-6).hi
        g = Enclosure.of(self.positive_integral(name, m)) + Enclosure.of(
            self.lipschitz(name, u, v) * (v - u) / 2
        )
        return (Enclosure.of(w) + g).hi

    def integral_at(self, name, alpha) -> Fraction:
        return self.W(alpha) + self.positive_integral(name, alpha)


def _family_quantity(fc: _FamilyCell, which: str):
    """(enclose(u, v), sample(alpha)) for one of M, M1, M2, M3 as a function of alpha."""

    pre = {"M1": fc.A1, "M2": fc.A2}
    qname = {"M": "Q", "M1": "Q1", "M2": "Q1", "M3": "Q2"}[which]

    def factor_upper(u, v):
        if which == "M":
            return iv.sqrt(Enclosure.of(fc.xr - fc.xl))
        if which == "M3":
            return Enclosure(1.0, 1.0)
        hi = range_bound(pre[which], u, v, rel_tol=1e-6).hi
        return iv.sqrt(Enclosure(0.0, max(hi, 0.0)))

    def enclose(u, v):
        e = iv.exp(Enclosure.of(fc.integral_upper(qname, u, v)) * 0.5)
        f = factor_upper(u, v)
        return Enclosure(0.0, (f * e).hi)

    def sample(alpha):
        alpha = Q(alpha)
        val = math.exp(0.5 * float(fc.integral_at(qname, alpha)))
        if which == "M":
            return math.sqrt(float(fc.xr - fc.xl)) * val
        if which == "M3":
            return val
        return math.sqrt(max(float(pre[which](alpha)), 0.0)) * val

    return enclose, sample


@lru_cache(maxsize=None)
def _family_cell(cell) -> _FamilyCell:
    return _FamilyCell(cell)


def energy_bounds_family(
    cell: tuple, alphas: tuple = (ALPHA_MIN, ALPHA_MAX), rel_tol: dict | None = None
) -> EnergyBounds:
    """Energy bounds valid uniformly for ``alpha`` in ``alphas``.

    ``rel_tol`` maps each quantity to its branch-and-bound tolerance; M3 sits
    near 1 and gets a tighter one.
    """
    tols = {"M": 1e-3, "M1": 1e-3, "M2": 1e-3, "M3": 1e-4}
    tols.update(rel_tol or {})
    cell = (Q(cell[0]), Q(cell[1]))
    fc = _family_cell(cell)
    vals = {}
    for which in ("M", "M1", "M2", "M3"):
        enclose, sample = _family_quantity(fc, which)
        _, ub = iv.branch_and_bound_max(enclose, sample, Q(alphas[0]), Q(alphas[1]), tols[which], 200)
        vals[which] = Enclosure(0.0, ub)
    return EnergyBounds(vals["M"], vals["M1"], vals["M2"], vals["M3"], cell)


# ---------------------------------------------------------------------------
# error ball


@dataclass(frozen=True)
class ErrorBallCert:
    cell: tuple[Fraction, Fraction]
    B0: Enclosure
    eps: Fraction
    contraction: Enclosure
    E_bound: Enclosure
    Ep_bound: Enclosure
    Epp_bound: Enclosure

    @property
    def outgoing(self) -> tuple[float, float, float]:
        return (self.E_bound.hi, self.Ep_bound.hi, self.Epp_bound.hi)


def ball_conditions(cell, energy: EnergyBounds, residual_sup, incoming, eps):
    """Inhomogeneous bound B0, the image radius of the eps-ball, and the contraction factor."""
    xl, xr = Q(cell[0]), Q(cell[1])
    h = Enclosure.of(xr - xl)
    e0, e1, e2 = (Enclosure(0.0, iv.upper(v)) for v in incoming)
    r = Enclosure(0.0, iv.upper(residual_sup))
    eps = Enclosure.of(eps)
    M = Enclosure(0.0, energy.M.hi)
    B0 = (Enclosure(0.0, energy.M1.hi) * e0 + Enclosure(0.0, energy.M2.hi) * e1
          + Enclosure(0.0, energy.M3.hi) * e2 + M * r)
    E_max = e0 + h * e1 + 0.5 * h.sqr() * eps
    image = B0 + M * E_max * eps
    contraction = M * (E_max + 0.5 * h.sqr() * eps)
    return B0, image, contraction, E_max


def certify_error_ball(
    cell,
    energy: EnergyBounds,
    residual_sup,
    incoming=(0, 0, 0),
    eps_candidates: Iterable | None = None,
) -> ErrorBallCert:
    """Find a radius eps such that ``N`` maps ``{||E''|| <= eps}`` into itself contractively."""
    xl, xr = Q(cell[0]), Q(cell[1])
    if eps_candidates is None:
        eps_candidates = [Q(0)] + [Q(2**k, 10**7) for k in range(0, 40)]
    for eps in eps_candidates:
        eps = Q(eps)
        B0, image, kappa, _ = ball_conditions(cell, energy, residual_sup, incoming, eps)
        if image.hi <= iv.lower(eps) and kappa.hi < 1.0:
            # the fixed point lies in every image ball, so shrink the radius
            # towards the smallest root of r = image(r)
            r = image.hi
            for _ in range(50):
                nxt = ball_conditions(cell, energy, residual_sup, incoming, r)[1].hi
                if nxt >= r:
                    break
                r = nxt
            h = Enclosure.of(xr - xl)
            e0, e1 = (Enclosure(0.0, iv.upper(v)) for v in incoming[:2])
            epp = Enclosure(0.0, r)
            ep = e1 + h * epp
            e = e0 + h * e1 + 0.5 * h.sqr() * epp
            return ErrorBallCert((xl, xr), B0, eps, kappa, Enclosure(0.0, e.hi),
                                 Enclosure(0.0, ep.hi), epp)
    raise CertificationError(f"no admissible ball radius on [{xl}, {xr}]")


# ---------------------------------------------------------------------------
# pipeline


@dataclass
class InnerCert:
    residual: dict
    energies: list[EnergyBounds]
    balls: list[ErrorBallCert]

    @property
    def E_sup(self) -> float:
        return max(b.E_bound.hi for b in self.balls)

    @property
    def Ep_sup(self) -> float:
        return max(b.Ep_bound.hi for b in self.balls)

    @property
    def Epp_sup(self) -> float:
        return max(b.Epp_bound.hi for b in self.balls)

    def cell_of(self, x) -> ErrorBallCert:
        x = Q(x)
        for b in self.balls:
            if b.cell[0] <= x <= b.cell[1]:
                return b
        raise ValueError(f"x = {x} not in [0, 5/2]")


def chain_error_balls(cells, energies, residual_sups, eps_first=None) -> list[ErrorBallCert]:
    balls = []
    incoming = (0.0, 0.0, 0.0)
    for k, (cell, en, r) in enumerate(zip(cells, energies, residual_sups)):
        cands = None
        if eps_first is not None:
            cands = [eps_first[k]] + [Q(2**j, 10**7) for j in range(0, 40)]
        ball = certify_error_ball(cell, en, r, incoming, cands)
        balls.append(ball)
        incoming = ball.outgoing
    return balls


def certify_inner_base(inner: InnerQuasi, regions=BASE_REGIONS) -> InnerCert:
    R = residual_poly(inner)
    res = certify_residual(R, BASE_PARTITION, "taylor_cells", regions)
    cells = [(Q(a), Q(b)) for a, b in regions]
    energies = [energy_bounds(inner, c) for c in cells]
    sups = [res.regions[c].mag for c in cells]
    return InnerCert({c: s for c, s in zip(cells, sups)}, energies, chain_error_balls(cells, energies, sups))


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("BLASIUS_CERT_THREADS", "1")))
    except ValueError:
        return 1


def pmap(fn, items) -> list:
    """Map over independent work items, in worker processes if ``BLASIUS_CERT_THREADS`` > 1."""
    items = list(items)
    n = min(worker_count(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


@lru_cache(maxsize=32)
def _family_cell_work(cell):
    return residual_sup_family(cell)[0], energy_bounds_family(cell)


def certify_inner_family(partition: SubintervalPartition = FAMILY_PARTITION) -> InnerCert:
    """Error bounds valid uniformly over the whole alpha interval."""
    cells = partition.cells
    work = pmap(_family_cell_work, cells)
    sups = [w[0] for w in work]
    energies = [w[1] for w in work]
    eps = FAMILY_EPS if partition == FAMILY_PARTITION else None
    return InnerCert({c: s for c, s in zip(cells, sups)}, energies,
                     chain_error_balls(cells, energies, sups, eps))


def certify_inner_at_alpha(inner: InnerQuasi, partition: SubintervalPartition = FAMILY_PARTITION) -> InnerCert:
    """Error bounds for one fixed alpha, with cells equal to the partition cells."""
    R = residual_poly(inner)
    cells = partition.cells
    res = certify_residual(R, partition, "taylor_cells", cells, refine=True)
    energies = [energy_bounds(inner, c) for c in cells]
    sups = [res.regions[c].mag for c in cells]
    return InnerCert({c: s for c, s in zip(cells, sups)}, energies, chain_error_balls(cells, energies, sups))
