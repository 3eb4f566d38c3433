"""Exact rational polynomials and rigorous range bounds.

``RationalPoly`` is a dense univariate polynomial with exact rational
coefficients (``gmpy2.mpq``, which interoperates with ``Fraction``);
``BiRationalPoly`` carries the extra parameter dependence (powers of ``alpha``).  All transformations (affine reparameterization,
Chebyshev conversion, integration) are exact; only the final comparison with
floats goes through :class:`~blasius_cert.interval.Enclosure`.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import gmpy2

from . import interval as iv
from .interval import Enclosure

Q = gmpy2.mpq


def _trim(coeffs: Iterable) -> tuple[Fraction, ...]:
    c = [Q(x) for x in coeffs]
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


class DegenerateInputError(ValueError):
    pass


class RationalPoly:
    """Dense polynomial ``sum c[k] x**k`` over the rationals (immutable)."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        object.__setattr__(self, "coeffs", _trim(coeffs))

    def __setattr__(self, *_):
        raise AttributeError("RationalPoly is immutable")

    @classmethod
    def x(cls) -> "RationalPoly":
        return cls([0, 1])

    @classmethod
    def const(cls, c) -> "RationalPoly":
        return cls([c])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __len__(self) -> int:
        return len(self.coeffs)

    def __getitem__(self, k: int) -> Fraction:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else Q(0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RationalPoly):
            other = RationalPoly([other])
        return self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __repr__(self) -> str:
        return f"RationalPoly({[str(c) for c in self.coeffs]})"

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    # ring operations ------------------------------------------------------
    @staticmethod
    def _coerce(other) -> "RationalPoly":
        return other if isinstance(other, RationalPoly) else RationalPoly([other])

    def __add__(self, other) -> "RationalPoly":
        o = self._coerce(other)
        n = max(len(self), len(o))
        return RationalPoly([self[k] + o[k] for k in range(n)])

    __radd__ = __add__

    def __neg__(self) -> "RationalPoly":
        return RationalPoly([-c for c in self.coeffs])

    def __sub__(self, other) -> "RationalPoly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "RationalPoly":
        return self._coerce(other) - self

    def __mul__(self, other) -> "RationalPoly":
        o = self._coerce(other)
        if not self or not o:
            return RationalPoly()
        out = [Q(0)] * (len(self) + len(o) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(o.coeffs):
                    out[i + j] += a * b
        return RationalPoly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "RationalPoly":
        out = RationalPoly([1])
        for _ in range(n):
            out = out * self
        return out

    def derivative(self) -> "RationalPoly":
        return RationalPoly([k * c for k, c in enumerate(self.coeffs)][1:])

    def antiderivative(self) -> "RationalPoly":
        """Antiderivative with zero constant term."""
        return RationalPoly([0] + [c / (k + 1) for k, c in enumerate(self.coeffs)])

    def integrate(self, lo, hi) -> Fraction:
        P = self.antiderivative()
        return P(Q(hi)) - P(Q(lo))

    def shift_power(self, k: int) -> "RationalPoly":
        """Multiply by x**k."""
        return RationalPoly([0] * k + list(self.coeffs)) if self else RationalPoly()

    # evaluation -----------------------------------------------------------
    def __call__(self, x):
        if isinstance(x, Enclosure):
            return self.enclose(x)
        x = Q(x)
        acc = Q(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def enclose(self, x: Enclosure) -> Enclosure:
        """Interval Horner evaluation (sound, not necessarily tight)."""
        acc = Enclosure(0.0, 0.0)
        for c in reversed(self.coeffs):
            acc = acc * x + Enclosure.of(c)
        return acc

    def abs_coeff_sum(self, start: int = 0) -> Fraction:
        return sum((abs(c) for c in self.coeffs[start:]), Q(0))

    def divmod(self, other: "RationalPoly") -> tuple["RationalPoly", "RationalPoly"]:
        if not other:
            raise ZeroDivisionError("polynomial division by zero")
        r = list(self.coeffs)
        dq = len(r) - len(other)
        if dq < 0:
            return RationalPoly(), self
        quot = [Q(0)] * (dq + 1)
        lead = other.coeffs[-1]
        for k in range(dq, -1, -1):
            f = r[k + len(other) - 1] / lead
            quot[k] = f
            if f:
                for j, b in enumerate(other.coeffs):
                    r[k + j] -= f * b
        return RationalPoly(quot), RationalPoly(r[: len(other) - 1])


def poly_arith(p: RationalPoly, q: RationalPoly | None, op: str) -> RationalPoly:
    """Dispatch form of the basic exact operations."""
    if op == "add":
        return p + q
    if op == "mul":
        return p * q
    if op == "derivative":
        return p.derivative()
    if op == "antiderivative":
        return p.antiderivative()
    raise ValueError(f"unknown op {op!r}")


def compose_affine(p: RationalPoly, scale, shift) -> RationalPoly:
    """Return the polynomial ``tau -> p(shift + scale*tau)``, exactly."""
    scale, shift = Q(scale), Q(shift)
    if scale == 0:
        raise DegenerateInputError("affine map with zero scale")
    lin = [shift, scale]
    acc: list[Fraction] = []
    for c in reversed(p.coeffs):
        # acc <- acc * (shift + scale tau) + c
        nxt = [Q(0)] * (len(acc) + 1)
        for k, a in enumerate(acc):
            nxt[k] += a * lin[0]
            nxt[k + 1] += a * lin[1]
        nxt[0] += c
        acc = nxt
    return RationalPoly(acc)


def to_unit(p: RationalPoly, lo, hi) -> RationalPoly:
    """Reparameterize ``[lo, hi]`` onto ``tau in [-1, 1]``."""
    lo, hi = Q(lo), Q(hi)
    if hi <= lo:
        raise DegenerateInputError(f"degenerate interval [{lo}, {hi}]")
    return compose_affine(p, (hi - lo) / 2, (hi + lo) / 2)


def monomial_to_chebyshev(c: Sequence[Fraction]) -> list[Fraction]:
    """Convert ``sum c_k y^k`` to ``sum A_j T_j(y)`` exactly (Horner in the T basis)."""
    b: list[Fraction] = []
    for ck in reversed(list(c)):
        # b <- y*b + ck, using y T_0 = T_1 and y T_j = (T_{j+1} + T_{j-1})/2
        nb = [Q(0)] * (len(b) + 1)
        for j, bj in enumerate(b):
            if not bj:
                continue
            if j == 0:
                nb[1] += bj
            else:
                half = bj / 2
                nb[j + 1] += half
                nb[j - 1] += half
        if nb:
            nb[0] += ck
        else:
            nb = [Q(ck)]
        b = nb
    while b and b[-1] == 0:
        b.pop()
    return b


def chebyshev_to_monomial(A: Sequence[Fraction]) -> RationalPoly:
    y = RationalPoly.x()
    T0, T1 = RationalPoly([1]), y
    out = RationalPoly()
    for j, a in enumerate(A):
        if j == 0:
            Tj = T0
        elif j == 1:
            Tj = T1
        else:
            T0, T1 = T1, 2 * y * T1 - T0
            Tj = T1
        out = out + Q(a) * Tj
    return out


def to_chebyshev(p: RationalPoly, interval: tuple) -> list[Fraction]:
    """Exact Chebyshev coefficients of p in the variable mapped from ``interval`` to [-1, 1]."""
    lo, hi = interval
    return monomial_to_chebyshev(to_unit(p, lo, hi).coeffs)


def from_chebyshev(A: Sequence[Fraction], interval: tuple) -> RationalPoly:
    lo, hi = Q(interval[0]), Q(interval[1])
    m = chebyshev_to_monomial(A)
    # y = (2x - lo - hi)/(hi - lo)
    return compose_affine(m, 2 / (hi - lo), -(hi + lo) / (hi - lo))


def chebyshev_l1(p: RationalPoly, interval: tuple) -> Fraction:
    return sum((abs(a) for a in to_chebyshev(p, interval)), Q(0))


# ---------------------------------------------------------------------------
# range bounds


@dataclass(frozen=True)
class RangeBound:
    """Certified ``lo <= p <= hi`` on a cell, from an exact cubic head plus an l1 tail."""

    cell: tuple[Fraction, Fraction]
    head_min: Enclosure
    head_max: Enclosure
    tail: Fraction

    @property
    def lo(self) -> float:
        return (self.head_min - Enclosure.of(self.tail)).lo

    @property
    def hi(self) -> float:
        return (self.head_max + Enclosure.of(self.tail)).hi

    @property
    def enclosure(self) -> Enclosure:
        return Enclosure(self.lo, self.hi)


def _cubic_extrema(c: Sequence[Fraction]) -> tuple[Enclosure, Enclosure]:
    """Enclosures of min and max over [-1, 1] of ``c0 + c1 t + c2 t^2 + c3 t^3``."""
    c0, c1, c2, c3 = (list(c) + [Q(0)] * 4)[:4]
    head = RationalPoly([c0, c1, c2, c3])
    values = [Enclosure.of(head(Q(-1))), Enclosure.of(head(Q(1)))]
    # critical points: 3 c3 t^2 + 2 c2 t + c1 = 0
    A, B, C = 3 * c3, 2 * c2, c1
    crit: list[Enclosure] = []
    if A == 0:
        if B != 0:
            crit.append(Enclosure.of(-C / B))
    else:
        disc = B * B - 4 * A * C
        if disc == 0:
            crit.append(Enclosure.of(-B / (2 * A)))
        elif disc > 0:
            s = iv.sqrt(Enclosure.of(disc))
            for root in ((-Enclosure.of(B) + s) / Enclosure.of(2 * A),
                         (-Enclosure.of(B) - s) / Enclosure.of(2 * A)):
                crit.append(root)
    for r in crit:
        if r.hi < -1.0 or r.lo > 1.0:
            continue
        r = r.intersect(Enclosure(-1.0, 1.0))
        values.append(head.enclose(r))
    lo = Enclosure(min(v.lo for v in values), min(v.hi for v in values))
    hi = Enclosure(max(v.lo for v in values), max(v.hi for v in values))
    return lo, hi


def range_bound_cubic_tail(p: RationalPoly, cell: tuple) -> RangeBound:
    """Bound p on ``cell``: exact extrema of the cubic head in the scaled variable, plus
    the sum of absolute values of the degree >= 4 coefficients."""
    lo, hi = Q(cell[0]), Q(cell[1])
    u = to_unit(p, lo, hi)
    mn, mx = _cubic_extrema(u.coeffs[:4])
    return RangeBound((lo, hi), mn, mx, u.abs_coeff_sum(4))


def range_bound(p: RationalPoly, lo, hi, rel_tol: float = 1e-3, max_depth: int = 12) -> Enclosure:
    """Adaptive bisection of :func:`range_bound_cubic_tail` until the tails are small."""
    lo, hi = Q(lo), Q(hi)
    out: list[RangeBound] = []

    def rec(a, b, depth):
        rb = range_bound_cubic_tail(p, (a, b))
        scale = max(rb.head_max.mag, rb.head_min.mag, 1e-300)
        if depth >= max_depth or float(rb.tail) <= rel_tol * scale:
            out.append(rb)
            return
        m = (a + b) / 2
        rec(a, m, depth + 1)
        rec(m, b, depth + 1)

    rec(lo, hi, 0)
    return Enclosure(min(r.lo for r in out), max(r.hi for r in out))


_HALVES = (Q(1, 2), Q(-1, 2)), (Q(1, 2), Q(1, 2))


def abs_sup_bound(p: RationalPoly, lo, hi, rel_tol: float = 1e-3, max_cells: int = 4096) -> tuple[float, float]:
    """``(sampled, certified)`` bounds of ``sup |p|`` on ``[lo, hi]`` by branch and bound.

    A cell is refined only while its certified bound could exceed the best
    exact sample by more than ``rel_tol``.  Children are re-expanded from the
    parent's unit-interval polynomial, which keeps the rationals small.
    """

    def cell_bound(u: RationalPoly) -> float:
        mn, mx = _cubic_extrema(u.coeffs[:4])
        t = Enclosure.of(u.abs_coeff_sum(4))
        return max((mx + t).hi, (t - mn).hi)

    def sample(u: RationalPoly) -> float:
        return max(abs(float(u(Q(0)))), abs(float(u(Q(1)))), abs(float(u(Q(-1)))))

    u0 = to_unit(p, lo, hi)
    best = sample(u0)
    heap = [(-cell_bound(u0), 0, u0)]
    count = 1
    while heap:
        neg, _, u = heap[0]
        if -neg <= best * (1 + rel_tol) or count >= max_cells:
            break
        heapq.heappop(heap)
        for scale, shift in _HALVES:
            v = compose_affine(u, scale, shift)
            best = max(best, sample(v))
            heapq.heappush(heap, (-cell_bound(v), count, v))
            count += 1
    return best, -heap[0][0]


# ---------------------------------------------------------------------------
# real roots


def _primitive(p: RationalPoly) -> RationalPoly:
    """Positive multiple of p with coprime integer coefficients (signs are preserved)."""
    if not p:
        return p
    den = 1
    for c in p.coeffs:
        den = gmpy2.lcm(den, Q(c).denominator)
    ints = [Q(c).numerator * (den // Q(c).denominator) for c in p.coeffs]
    g = 0
    for n in ints:
        g = gmpy2.gcd(g, n)
    return RationalPoly([Q(n // g) for n in ints])


def sturm_sequence(p: RationalPoly) -> list[RationalPoly]:
    seq = [_primitive(p), _primitive(p.derivative())]
    while seq[-1] and seq[-1].degree > 0:
        _, r = seq[-2].divmod(seq[-1])
        if not r:
            break
        seq.append(_primitive(-r))
    return seq


def _sign(q: Fraction) -> int:
    return (q > 0) - (q < 0)


def _variations(seq: list[RationalPoly], x: Fraction) -> int:
    signs = [s for s in (_sign(f(x)) for f in seq) if s]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


class SignIsolationError(RuntimeError):
    pass


@dataclass(frozen=True)
class SignChange:
    """An exact rational bracket ``(lo, hi)`` containing exactly one sign change of p."""

    lo: Fraction
    hi: Fraction

    @property
    def enclosure(self) -> Enclosure:
        return Enclosure(iv.lower(self.lo), iv.upper(self.hi))


def isolate_sign_changes(p: RationalPoly, interval: tuple, tol=Q(1, 10**9)) -> list[SignChange]:
    """Disjoint brackets of the sign changes of p inside ``interval``.

    Distinct real roots are counted with a Sturm sequence; roots of even
    multiplicity are not sign changes and are dropped.  Outside the returned
    brackets the sign of p is constant between consecutive brackets.
    """
    if not p:
        raise DegenerateInputError("zero polynomial has no isolated sign changes")
    a, b = Q(interval[0]), Q(interval[1])
    tol = Q(tol)
    if p.degree == 0:
        return []
    seq = sturm_sequence(p)

    def count(u, v):  # distinct roots in (u, v]
        return _variations(seq, u) - _variations(seq, v)

    found: list[tuple[Fraction, Fraction]] = []
    # treat a root exactly at the left end as belonging to the interval
    if p(a) == 0:
        found.append((a, a))
    stack = [(a, b)]
    while stack:
        u, v = stack.pop()
        n = count(u, v)
        if n == 0:
            continue
        if n == 1 and v - u <= tol:
            found.append((u, v))
            continue
        m = (u + v) / 2
        if p(m) == 0 and n == 1:
            found.append((m, m))
            continue
        stack.append((m, v))
        stack.append((u, m))
    found.sort()
    out = []
    for u, v in found:
        if u == v:
            # exact root: sign change iff neighbours differ in sign
            eps = tol
            left, right = p(max(a, u - eps)), p(min(b, u + eps))
            if u in (a, b) or _sign(left) != _sign(right):
                out.append(SignChange(u, v))
            continue
        if _sign(p(u)) != _sign(p(v)) and p(u) != 0:
            out.append(SignChange(u, v))
    return out


def positive_part_integral(p: RationalPoly, lo, hi, tol=Q(1, 10**12)) -> Fraction:
    """Rigorous upper bound (exact rational) of ``int_lo^hi max(p, 0) dx``.

    Exact on the certified-sign segments; on each root bracket the integrand is
    bounded by the bracket width times a bound on |p|.
    """
    lo, hi = Q(lo), Q(hi)
    if hi <= lo:
        raise DegenerateInputError("degenerate integration interval")
    if not p:
        return Q(0)
    changes = isolate_sign_changes(p, (lo, hi), tol)
    P = p.antiderivative()
    total = Q(0)
    cursor = lo
    brackets = [(c.lo, c.hi) for c in changes]
    for u, v in brackets + [(hi, hi)]:
        if u > cursor:
            # the sign is constant on (cursor, u); find a point where p != 0
            k = 2
            s = p((cursor + u) / 2)
            while s == 0:
                s = p(cursor + (u - cursor) / (k + 1))
                k += 1
            if s > 0:
                total += P(u) - P(cursor)
        if v > u:
            bound = sum((abs(c) for c in to_unit(p, u, v).coeffs), Q(0))
            total += (v - u) * bound
        cursor = max(cursor, v)
    return total


# ---------------------------------------------------------------------------
# bivariate


class BiRationalPoly:
    """``sum c[i][j] x**i alpha**j`` over the rationals.

    Stored as a tuple of rows; row ``i`` is the ``RationalPoly`` in alpha that
    multiplies ``x**i``.
    """

    __slots__ = ("rows",)

    def __init__(self, rows: Iterable):
        r = [row if isinstance(row, RationalPoly) else RationalPoly(row) for row in rows]
        while r and not r[-1]:
            r.pop()
        object.__setattr__(self, "rows", tuple(r))

    def __setattr__(self, *_):
        raise AttributeError("BiRationalPoly is immutable")

    @classmethod
    def from_x_poly(cls, p: RationalPoly) -> "BiRationalPoly":
        return cls([[c] for c in p.coeffs])

    @classmethod
    def from_alpha_poly(cls, p: RationalPoly) -> "BiRationalPoly":
        return cls([p])

    @property
    def degree_x(self) -> int:
        return len(self.rows) - 1

    @property
    def degree_alpha(self) -> int:
        return max((r.degree for r in self.rows), default=-1)

    def row(self, i: int) -> RationalPoly:
        return self.rows[i] if 0 <= i < len(self.rows) else RationalPoly()

    def __eq__(self, other) -> bool:
        return isinstance(other, BiRationalPoly) and self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def __add__(self, other) -> "BiRationalPoly":
        o = other if isinstance(other, BiRationalPoly) else BiRationalPoly([[other]])
        n = max(len(self.rows), len(o.rows))
        return BiRationalPoly([self.row(i) + o.row(i) for i in range(n)])

    __radd__ = __add__

    def __neg__(self) -> "BiRationalPoly":
        return BiRationalPoly([-r for r in self.rows])

    def __sub__(self, other) -> "BiRationalPoly":
        o = other if isinstance(other, BiRationalPoly) else BiRationalPoly([[other]])
        return self + (-o)

    def __mul__(self, other) -> "BiRationalPoly":
        if not isinstance(other, BiRationalPoly):
            return BiRationalPoly([r * Q(other) for r in self.rows])
        if not self.rows or not other.rows:
            return BiRationalPoly([])
        out = [RationalPoly()] * (len(self.rows) + len(other.rows) - 1)
        for i, a in enumerate(self.rows):
            if not a:
                continue
            for j, b in enumerate(other.rows):
                if b:
                    out[i + j] = out[i + j] + a * b
        return BiRationalPoly(out)

    __rmul__ = __mul__

    def deriv_x(self) -> "BiRationalPoly":
        return BiRationalPoly([r * i for i, r in enumerate(self.rows)][1:])

    def deriv_alpha(self) -> "BiRationalPoly":
        return BiRationalPoly([r.derivative() for r in self.rows])

    def at_alpha(self, alpha) -> RationalPoly:
        alpha = Q(alpha)
        return RationalPoly([r(alpha) for r in self.rows])

    def at_x(self, x) -> RationalPoly:
        x = Q(x)
        acc = RationalPoly()
        for r in reversed(self.rows):
            acc = acc * x + r
        return acc

    def __call__(self, x, alpha) -> Fraction:
        return self.at_alpha(alpha)(x)

    def integrate_x(self, lo, hi) -> RationalPoly:
        """``int_lo^hi p(x, alpha) dx`` as an exact polynomial in alpha."""
        lo, hi = Q(lo), Q(hi)
        acc = RationalPoly()
        for i, r in enumerate(self.rows):
            w = (hi ** (i + 1) - lo ** (i + 1)) / (i + 1)
            acc = acc + r * w
        return acc

    def compose_affine(self, sx, tx, sa, ta) -> "BiRationalPoly":
        """Return ``(u, v) -> p(tx + sx*u, ta + sa*v)``."""
        ncols = self.degree_alpha + 1
        cols = [RationalPoly([r[j] for r in self.rows]) for j in range(ncols)]
        cols = [compose_affine(c, sx, tx) if c else c for c in cols]
        nrows = max((len(c) for c in cols), default=0)
        rows = [RationalPoly([c[i] for c in cols]) for i in range(nrows)]
        return BiRationalPoly([compose_affine(r, sa, ta) if r else r for r in rows])

    def to_unit_box(self, xbox, abox) -> "BiRationalPoly":
        (xl, xr), (al, ar) = [(Q(u), Q(v)) for u, v in (xbox, abox)]
        if xr <= xl or ar <= al:
            raise DegenerateInputError("degenerate box")
        return self.compose_affine((xr - xl) / 2, (xr + xl) / 2, (ar - al) / 2, (ar + al) / 2)

    def abs_coeff_sum(self) -> Fraction:
        return sum((r.abs_coeff_sum() for r in self.rows), Q(0))

    def sup_abs_bound(self, xbox, abox) -> Fraction:
        """Crude certified bound of ``|p|`` on a box (l1 of the unit-box monomial coefficients)."""
        return self.to_unit_box(xbox, abox).abs_coeff_sum()

    def chebyshev_coeffs(self, xbox, abox) -> list[list[Fraction]]:
        u = self.to_unit_box(xbox, abox)
        ncols = u.degree_alpha + 1
        xcheb = [monomial_to_chebyshev([r[j] for r in u.rows]) for j in range(ncols)]
        nx = max((len(c) for c in xcheb), default=0)
        out = []
        for i in range(nx):
            apoly = [c[i] if i < len(c) else Q(0) for c in xcheb]
            out.append(monomial_to_chebyshev(apoly))
        return out

    def chebyshev_l1(self, xbox, abox) -> Fraction:
        return sum((abs(a) for row in self.chebyshev_coeffs(xbox, abox) for a in row), Q(0))


def exact_range(p: RationalPoly, lo, hi, tol=Q(1, 10**24)) -> Enclosure:
    """Tight enclosure of the range of p on ``[lo, hi]`` through its critical points.

    Extrema lie at the endpoints or at sign changes of p'; each sign change is
    isolated to width ``tol`` and bounded there by the cubic-head method.
    """
    lo, hi = Q(lo), Q(hi)
    if hi <= lo:
        raise DegenerateInputError(f"degenerate interval [{lo}, {hi}]")
    vals = [Enclosure.of(p(lo)), Enclosure.of(p(hi))]
    d = p.derivative()
    if d:
        for sc in isolate_sign_changes(d, (lo, hi), tol):
            if sc.lo == sc.hi:
                vals.append(Enclosure.of(p(sc.lo)))
            else:
                vals.append(range_bound_cubic_tail(p, (sc.lo, sc.hi)).enclosure)
    return Enclosure(min(v.lo for v in vals), max(v.hi for v in vals))
