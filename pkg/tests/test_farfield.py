"""Far-field residual, the x-domain error constants and oracle containment."""

import math
import random
from fractions import Fraction as Fr

import mpmath
import pytest

from blasius_cert import farfield as ff
from blasius_cert import oracle, quasi, report
from blasius_cert.interval import DomainError


def test_zero_c_gives_zero_residual():
    r = ff.far_residual(2.5, 0.0)
    assert r.value.lo == r.value.hi == 0.0


def test_residual_domain():
    with pytest.raises(DomainError):
        ff.far_residual(1.5, 0.2)
    with pytest.raises(DomainError):
        ff.far_residual(2.5, 0.3)


def test_residual_homogeneity_in_c():
    for t in (2.0, 3.0, 5.0):
        ratios = [ff.far_residual(t, c).value.mag / c for c in (1e-2, 1e-3, 1e-4)]
        assert max(ratios) < 1e-2
        # the two-term truncation leaves a cubic defect: ratio falls like c^2
        assert ratios[1] <= ratios[0] and ratios[2] <= ratios[1]


def test_residual_is_cubic_order_decay():
    # the defect of the two-term series is O(e^{-3t}); normalized it stays bounded and decays
    c = quasi.initial_triple(0).center[2]
    norms = [ff.far_residual(t, c).normalized.mag for t in (1.96, 2.0, 3.0, 5.0, 8.0)]
    assert max(norms) < 1e-3
    assert all(u >= v for u, v in zip(norms, norms[1:]))


def test_x_constants_base():
    k = ff.map_far_bounds_to_x(quasi.initial_triple(0), ff.FarErrorBounds(ff.C_BASE))
    for v, ref in zip(k.as_tuple(), (1.69e-5, 9.20e-5, 5.02e-4)):
        assert abs(v - ref) <= 0.02 * ref


def test_x_constants_family():
    k = ff.map_far_bounds_family()
    for v, ref in zip(k.as_tuple(), (1.76e-5, 9.82e-5, 5.50e-4)):
        assert abs(v - ref) <= 0.02 * ref
    base = ff.map_far_bounds_to_x(quasi.initial_triple(0), ff.FarErrorBounds(ff.C_BASE))
    assert k.a_sup > base.a_sup


def test_t_domain_bound_value():
    b = ff.FarErrorBounds(ff.C_BASE)
    t = 2.0
    assert b.E(t).contains(float(ff.C_BASE) * math.exp(-3 * t) / (9 * t**1.5))


def test_chain_rule_identities():
    """x-derivatives of E_x = sqrt(a/(2t)) E_t equal the combinations the constants bound."""
    mpmath.mp.dps = 30
    rng = random.Random(3)
    for _ in range(10):
        a = mpmath.mpf(rng.uniform(1.5, 1.8))
        b = mpmath.mpf(rng.uniform(-1.6, -1.3))
        C = mpmath.mpf(rng.uniform(1e-4, 2e-4))
        Et = lambda t: C * mpmath.exp(-3 * t) / (9 * t**1.5) * (1 + mpmath.sin(t) / 7)
        t_of = lambda x: a / 2 * (x + b / a) ** 2
        Ex = lambda x: mpmath.sqrt(a / (2 * t_of(x))) * Et(t_of(x))
        x = mpmath.mpf(rng.uniform(2.6, 5.0))
        t = t_of(x)
        e0, e1, e2 = (mpmath.diff(Et, t, k) for k in range(3))
        assert mpmath.almosteq(mpmath.diff(Ex, x, 1), a * (e1 - e0 / (2 * t)), 1e-12)
        comb = mpmath.sqrt(t) * e2 - e1 / (2 * mpmath.sqrt(t)) + e0 / (2 * t**1.5)
        assert mpmath.almosteq(mpmath.diff(Ex, x, 2), a * mpmath.sqrt(2 * a) * comb, 1e-12)


def test_extremal_t_bounds_map_to_x_constants():
    """E_t saturating its bound gives |E_x| = k0 t^-2 e^{-3t} with a at its sup."""
    T = quasi.initial_triple(0)
    k = ff.map_far_bounds_to_x(T, ff.FarErrorBounds(ff.C_BASE))
    a = k.a_sup
    for t in (2.0, 3.0, 4.5):
        Et = float(ff.C_BASE) * math.exp(-3 * t) / (9 * t**1.5)
        Ex = math.sqrt(a / (2 * t)) * Et
        assert Ex <= k.bounds_at(t)[0] * (1 + 1e-12)


@pytest.mark.parametrize("alpha", [Fr(0), Fr(-3, 50), Fr(3, 50)])
def test_oracle_inside_far_bounds(alpha):
    path = "base" if alpha == 0 else "family"
    traj = oracle.integrate(alpha, 0, 20.0)
    fa, fb, fc = oracle.fit_triple(traj)
    T = quasi.initial_triple(alpha, path)
    assert T.contains(fa, fb, fc)
    if path == "base":
        k = ff.map_far_bounds_to_x(T, ff.FarErrorBounds(ff.C_BASE))
    else:
        k = ff.map_far_bounds_family()
    fit = quasi.MatchTriple(*(quasi.Enclosure(v, v) for v in (fa, fb, fc)), T.rho0, T.center)
    checked = 0
    for j in range(50):
        x = 2.5 + 5.5 * j / 49
        t = fa / 2 * (x + fb / fa) ** 2
        out = quasi.f0_outer(x, fit)
        dev = [abs(u - v.mid) for u, v in zip(traj(x), out)]
        for d, bound, ok in zip(dev, k.bounds_at(t), report.far_resolvable(t, k)):
            if ok:
                checked += 1
                assert d <= bound
    assert checked >= 30
