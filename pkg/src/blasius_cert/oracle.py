"""Independent, non-rigorous solver of F''' + F F'' = 0, F(0) = alpha, F'(0) = gamma, F''(0) = 1.

Taylor-series method: the ODE is polynomial, so the coefficients of F about
any point follow from the convolution recurrence

    (k+1)(k+2)(k+3) f[k+3] = -sum_{i=0}^{k} f[i] (k-i+1)(k-i+2) f[k-i+2].

Steps are controlled by step doubling.  Nothing in the certification path
consumes these results.
"""

from __future__ import annotations

import bisect
import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

ORDER = 20


class IntegrationError(RuntimeError):
    pass


def taylor_coeffs(F: float, F1: float, F2: float, order: int = ORDER) -> list[float]:
    f = [0.0] * (order + 1)
    f[0], f[1], f[2] = F, F1, F2 / 2.0
    for k in range(order - 2):
        acc = 0.0
        for i in range(k + 1):
            acc += f[i] * (k - i + 1) * (k - i + 2) * f[k - i + 2]
        f[k + 3] = -acc / ((k + 1) * (k + 2) * (k + 3))
    return f


def _eval(f: list[float], h: float) -> tuple[float, float, float]:
    """``(F, F', F'')`` of the Taylor polynomial at offset h."""
    n = len(f) - 1
    p0 = p1 = p2 = 0.0
    for k in range(n, -1, -1):
        p0 = p0 * h + f[k]
        if k >= 1:
            p1 = p1 * h + k * f[k]
        if k >= 2:
            p2 = p2 * h + k * (k - 1) * f[k]
    return p0, p1, p2


def _step(state, h, order):
    return _eval(taylor_coeffs(*state, order), h)


@dataclass
class OdeTrajectory:
    xs: list[float]
    states: list[tuple[float, float, float]]
    coeffs: list[list[float]]
    order: int = ORDER
    tol: float = 1e-14
    alpha: Fraction = Fraction(0)
    gamma: Fraction = Fraction(0)
    controller: str = "step-doubling"

    @property
    def samples(self) -> list[tuple[float, float, float, float]]:
        return [(x, *s) for x, s in zip(self.xs, self.states)]

    @property
    def x_max(self) -> float:
        return self.xs[-1]

    def __call__(self, x: float) -> tuple[float, float, float]:
        """Dense output from the stored Taylor polynomials."""
        if not self.xs[0] <= x <= self.xs[-1]:
            raise ValueError(f"x = {x} outside the trajectory")
        i = bisect.bisect_right(self.xs, x) - 1
        i = min(i, len(self.coeffs) - 1)
        return _eval(self.coeffs[i], x - self.xs[i])

    def to_csv(self, path, xs: Iterable[float] | None = None) -> None:
        pts = self.xs if xs is None else list(xs)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "F", "F'", "F''"])
            for x in pts:
                w.writerow([repr(float(x))] + [repr(v) for v in self(x)])


def integrate(alpha=0, gamma=0, x_max: float = 20.0, tol: float = 1e-14,
              order: int = ORDER, h0: float = 0.05, h_min: float = 1e-8) -> OdeTrajectory:
    if not 1e-15 <= tol <= 1e-6:
        raise ValueError("tol must lie in [1e-15, 1e-6]")
    state = (float(Fraction(alpha)), float(Fraction(gamma)), 1.0)
    x = 0.0
    xs, states, coeffs = [0.0], [state], []
    h = h0
    while x < x_max:
        h = min(h, x_max - x)
        full = _step(state, h, order)
        half = _step(_step(state, h / 2, order), h / 2, order)
        scale = max(1.0, *(abs(v) for v in half))
        err = max(abs(u - v) for u, v in zip(full, half)) / scale
        if err <= tol or h <= h_min:
            if h <= h_min and err > tol:
                raise IntegrationError(f"step underflow at x = {x}")
            coeffs.append(taylor_coeffs(*state, order))
            state = _step(state, h, order)
            x = x + h
            xs.append(x)
            states.append(state)
            fac = 2.0 if err < tol / 2**order else 1.2 if err < tol / 16 else 1.0
            h = min(h * fac, 0.25)
        else:
            h *= 0.5
    # final polynomial for dense output at x_max
    coeffs.append(taylor_coeffs(*state, order))
    return OdeTrajectory(xs, states, coeffs, order, tol, Fraction(alpha), Fraction(gamma))


@dataclass(frozen=True)
class BlasiusConstants:
    a_inf: float
    wall_stress_scaled: float
    wall_stress_original: float
    b_inf: float = math.nan
    a_inf_check: float = math.nan


def constants(traj: OdeTrajectory, x_check: float = 15.0) -> BlasiusConstants:
    F, F1, _ = traj(traj.x_max)
    a = F1
    w = a ** -1.5
    return BlasiusConstants(a, w, w / math.sqrt(2.0), F - a * traj.x_max, traj(x_check)[1])


def fit_triple(traj: OdeTrajectory, t_fit: float = 8.0) -> tuple[float, float, float]:
    """Far-field (a, b, c) of the trajectory: a, b from the linear asymptote, c from F'' at t_fit.

    ``F'' = a^2 s K(t; c)`` is solved for c with the c^2 term included (Newton).
    """
    from . import special  # noqa: PLC0415
    from .interval import Enclosure  # noqa: PLC0415

    k = constants(traj)
    a, b = k.a_inf, k.b_inf
    s = math.sqrt(2 * t_fit / a)
    x = s - b / a
    F2 = traj(x)[2]

    def resid(c):
        q, q1, q2 = (v.mid for v in special.q0_derivs(Enclosure(t_fit, t_fit), Enclosure(c, c), 2))
        return a * a * s * (q2 - q1 / (2 * t_fit) + q / (2 * t_fit**2)) - F2

    c = 0.2
    for _ in range(30):
        d = 1e-7
        r = resid(c)
        dc = r / ((resid(c + d) - resid(c - d)) / (2 * d))
        c -= dc
        if abs(dc) < 1e-15:
            break
    return a, b, c


@dataclass
class Deviation:
    inner_max: tuple[float, float, float]
    outer_normalized_max: tuple[float, float, float]
    inner_samples: list[tuple[float, float, float, float]] = field(default_factory=list)
    outer_samples: list[tuple[float, float, float, float, float]] = field(default_factory=list)


def compare(traj: OdeTrajectory, inner_values, outer_values, t_of_x, n_inner: int = 201,
            outer_xs: Iterable[float] | None = None) -> Deviation:
    """Deviations of the trajectory from a quasi-solution.

    ``inner_values(x)`` and ``outer_values(x)`` give (F0, F0', F0'') as floats;
    outer deviations are normalized by ``t^2 e^{3t}``, ``t^{3/2} e^{3t}``, ``t e^{3t}``.
    """
    ins = []
    for k in range(n_inner):
        x = 2.5 * k / (n_inner - 1)
        o = traj(x)
        q = inner_values(x)
        ins.append((x, *(abs(u - v) for u, v in zip(o, q))))
    outs = []
    if outer_xs is None:
        outer_xs = [2.5 + 5.5 * k / 49 for k in range(50)]
    for x in outer_xs:
        if x > traj.x_max:
            continue
        o = traj(x)
        q = outer_values(x)
        t = t_of_x(x)
        e = math.exp(3 * t)
        d = [abs(u - v) for u, v in zip(o, q)]
        outs.append((x, t, d[0] * t**2 * e, d[1] * t**1.5 * e, d[2] * t * e))
    imax = tuple(max(s[j] for s in ins) for j in (1, 2, 3))
    omax = tuple(max((s[j] for s in outs), default=0.0) for j in (2, 3, 4))
    return Deviation(imax, omax, ins, outs)
