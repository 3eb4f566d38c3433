"""Matching of the inner polynomial and the far-field representation at x = 5/2.

With the far-field correction ``h`` and the inner error set to zero the maps are::

    N1 = F0'(5/2) - a (q0' - q0/(2 t_m))
    N2 = F0(5/2) - 5/2 N1 - sqrt(a/(2 t_m)) q0
    N3 = c F0''(5/2) / (a^2 s K),   K = q0'' - q0'/(2 t_m) + q0/(2 t_m^2),  s = 5/2 + b/a

N3 rescales c so that the outer second derivative ``a^2 s K`` equals the inner
one; since q0 is linear in c up to the c^2 term, this is a fixed-point map in c.
The vector form uses ``A = (a, b/2, c/2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import lru_cache

from . import interval as iv
from . import special
from .interval import DomainError, Enclosure
from .quasi import ALPHA_MAX, ALPHA_MIN, X_MATCH, T_OUTER_MIN, build_inner, check_alpha, initial_triple

Q = Fraction

BASE_ALPHA_C = 0.764
FAMILY_ALPHA_C = 0.839
FD_STEP = 1e-6


class TrustRegionBreach(RuntimeError):
    """An iterate left the admissible set."""


@dataclass(frozen=True)
class MatchState:
    A: tuple[Enclosure, Enclosure, Enclosure]
    alpha: Fraction = Q(0)
    iterate_count: int = 0
    residual_norm: Enclosure | None = None
    path: str = "base"

    @classmethod
    def from_triple(cls, a, b, c, alpha=0, path: str = "auto") -> "MatchState":
        alpha = check_alpha(alpha)
        if path == "auto":
            path = "base" if alpha == 0 else "family"
        A = (Enclosure.of(a), Enclosure.of(b) * 0.5, Enclosure.of(c) * 0.5)
        return cls(A, alpha, 0, None, path)

    @classmethod
    def initial(cls, alpha=0, path: str = "auto") -> "MatchState":
        alpha = check_alpha(alpha)
        if path == "auto":
            path = "base" if alpha == 0 else "family"
        a0, b0, c0 = initial_triple(alpha, path).center
        return cls.from_triple(a0, b0, c0, alpha, path)

    @property
    def abc(self) -> tuple[Enclosure, Enclosure, Enclosure]:
        return self.A[0], self.A[1] * 2.0, self.A[2] * 2.0

    @property
    def abc_float(self) -> tuple[float, float, float]:
        return tuple(v.mid for v in self.abc)

    def wall_stress(self) -> tuple[Enclosure, Enclosure]:
        """``(a^{-3/2}, a^{-3/2}/sqrt 2)``: scaled and original-variable wall stress."""
        a = self.A[0]
        w = 1.0 / (a * iv.sqrt(a))
        return w, w / iv.sqrt(Enclosure(2.0, 2.0))


@lru_cache(maxsize=64)
def inner_match_values(alpha: Fraction, path: str) -> tuple[Enclosure, Enclosure, Enclosure]:
    F, F1, F2 = build_inner(alpha, path).values(X_MATCH)
    return Enclosure.of(F), Enclosure.of(F1), Enclosure.of(F2)


def N_map(a, b, c, alpha=0, path: str = "auto") -> tuple[Enclosure, Enclosure, Enclosure]:
    """``(N1, N2, N3)`` at (a, b, c) with h = E = 0."""
    alpha = check_alpha(alpha)
    if path == "auto":
        path = "base" if alpha == 0 else "family"
    a, b, c = (Enclosure.of(v) for v in (a, b, c))
    if a.lo <= 0.0:
        raise DomainError("matching requires a > 0")
    if c.mag >= 0.25:
        raise TrustRegionBreach(f"|c| = {c.mag} >= 1/4")
    if c.lo <= 0.0 <= c.hi:
        raise DomainError("N3 is undefined at c = 0")
    Fi, F1i, F2i = inner_match_values(alpha, path)
    s = Enclosure.of(X_MATCH) + b / a
    if s.lo <= 0.0:
        raise DomainError("x = 5/2 lies left of the far-field branch point")
    tm = 0.5 * a * s.sqr()
    if tm.lo < T_OUTER_MIN:
        raise DomainError(f"t_m = {tm} below {T_OUTER_MIN}")
    q, q1, q2 = special.q0_derivs(tm, c, 2)
    N1 = F1i - a * (q1 - q / (2.0 * tm))
    N2 = Fi - Enclosure.of(X_MATCH) * N1 - q / s
    K = q2 - q1 / (2.0 * tm) + q / (2.0 * tm.sqr())
    N3 = c * F2i / (a.sqr() * s * K)
    return N1, N2, N3


def apply_N(state: MatchState, mode: str = "h_zero") -> MatchState:
    """One application of the weighted map ``A -> (N1, N2/2, N3/2)``."""
    if mode != "h_zero":
        raise ValueError(f"unsupported mode {mode!r}")
    a, b, c = state.abc
    N1, N2, N3 = N_map(a, b, c, state.alpha, state.path)
    newA = (N1, N2 * 0.5, N3 * 0.5)
    return replace(state, A=newA, iterate_count=state.iterate_count + 1,
                   residual_norm=weighted_norm(state.A, newA))


def weighted_norm(A, B) -> Enclosure:
    """``||A - B||_2`` of weighted vectors."""
    acc = Enclosure(0.0, 0.0)
    for x, y in zip(A, B):
        acc = acc + (Enclosure.of(x) - Enclosure.of(y)).sqr()
    return iv.sqrt(Enclosure(max(0.0, acc.lo), acc.hi))


def residual_at_initial(alpha=0, path: str = "auto") -> Enclosure:
    """``||A0 - N[A0]||_2``."""
    return apply_N(MatchState.initial(alpha, path)).residual_norm


@dataclass(frozen=True)
class FixedPointResult:
    state: MatchState
    steps: list[float]
    converged: bool

    @property
    def ratios(self) -> list[float]:
        s = self.steps
        return [s[k] / s[k - 1] for k in range(1, len(s)) if s[k - 1] > 0]


def fixed_point(alpha=0, path: str = "auto", tol: float = 1e-14, max_iter: int = 60,
                rho0=None) -> FixedPointResult:
    """Iterate ``A <- N[A]`` from A0 on midpoints; stop when the step is below ``tol``."""
    state = MatchState.initial(alpha, path)
    A0 = state.A
    if rho0 is None:
        rho0 = initial_triple(state.alpha, state.path).rho0
    steps = []
    for _ in range(max_iter):
        nxt = apply_N(state)
        mids = tuple(Enclosure(v.mid, v.mid) for v in nxt.A)
        step = math.sqrt(sum((x.mid - y.mid) ** 2 for x, y in zip(mids, state.A)))
        steps.append(step)
        state = replace(nxt, A=mids)
        if weighted_norm(A0, state.A).lo > float(rho0):
            raise TrustRegionBreach(f"iterate {state.iterate_count} left the trust region")
        if step < tol:
            return FixedPointResult(state, steps, True)
    return FixedPointResult(state, steps, False)


@dataclass(frozen=True)
class JacobianEstimate:
    entries: tuple[tuple[Enclosure, ...], ...]
    norm2: Enclosure
    rigorous: bool = False


def _weighted_N(A, alpha, path):
    a, b, c = A[0], 2.0 * A[1], 2.0 * A[2]
    N1, N2, N3 = N_map(a, b, c, alpha, path)
    return (N1.mid, 0.5 * N2.mid, 0.5 * N3.mid)


def jacobian_norm(state: MatchState, step: float = FD_STEP) -> JacobianEstimate:
    """Central-difference Jacobian of the weighted map (non-rigorous diagnostic).

    Each entry is widened by the change between steps h and 2h, an estimate
    of the truncation error, plus the rounding level ``1e-15 / h``.
    """
    A = [v.mid for v in state.A]
    cols = []
    for j in range(3):
        d = []
        for h in (step, 2 * step):
            up, dn = list(A), list(A)
            up[j] += h
            dn[j] -= h
            fu = _weighted_N(up, state.alpha, state.path)
            fd = _weighted_N(dn, state.alpha, state.path)
            d.append([(u - w) / (2 * h) for u, w in zip(fu, fd)])
        cols.append([Enclosure(v1, v1).widen(abs(v1 - v2) + 1e-15 / step) for v1, v2 in zip(*d)])
    entries = tuple(tuple(cols[j][i] for j in range(3)) for i in range(3))
    acc = Enclosure(0.0, 0.0)
    for row in entries:
        for e in row:
            acc = acc + e.sqr()
    return JacobianEstimate(entries, iv.sqrt(Enclosure(max(0.0, acc.lo), acc.hi)))


def jacobian_sup(alpha=0, path: str = "auto", rho0=None) -> Enclosure:
    """Largest Jacobian norm over A0 and the six axis points of the trust ball (diagnostic)."""
    state = MatchState.initial(alpha, path)
    if rho0 is None:
        rho0 = initial_triple(state.alpha, state.path).rho0
    r = float(rho0)
    best = jacobian_norm(state).norm2
    for j in range(3):
        for sgn in (-1.0, 1.0):
            A = list(state.A)
            A[j] = A[j] + sgn * r
            best = best.union(jacobian_norm(replace(state, A=tuple(A))).norm2)
    return best


@dataclass(frozen=True)
class ContractionResult:
    certified: bool
    residual: Enclosure
    jacobian: Enclosure
    alpha_c: float
    rho0: Fraction
    residual_margin: float
    jacobian_margin: float
    rigorous: bool = False


def verify_contraction(state: MatchState, alpha_c: float | None = None, rho0=None,
                       jacobian: Enclosure | None = None) -> ContractionResult:
    """Check ``||A0 - N[A0]|| <= (1 - alpha_c) rho0`` and ``||J|| <= alpha_c < 1``.

    ``state`` is the initial state A0.  The Jacobian condition uses the
    finite-difference estimate, so the result is flagged non-rigorous.
    """
    if alpha_c is None:
        alpha_c = BASE_ALPHA_C if state.path == "base" else FAMILY_ALPHA_C
    if rho0 is None:
        rho0 = initial_triple(state.alpha, state.path).rho0
    rho0 = Q(rho0)
    res = apply_N(replace(state, residual_norm=None)).residual_norm
    if jacobian is None:
        jacobian = jacobian_sup(state.alpha, state.path, rho0)
    limit = (Enclosure.of(1 - Q(alpha_c)) * Enclosure.of(rho0)).lo
    r_margin = limit - res.hi
    j_margin = alpha_c - jacobian.hi
    ok = r_margin > 0 and j_margin > 0 and alpha_c < 1
    return ContractionResult(ok, res, jacobian, alpha_c, rho0, r_margin, j_margin)


def alpha_grid(n: int = 13) -> list[Fraction]:
    return [ALPHA_MIN + (ALPHA_MAX - ALPHA_MIN) * k / (n - 1) for k in range(n)]
