"""Quasi-solution data, inner polynomial, outer representation and t_m."""

import json
from fractions import Fraction as Fr
from importlib import resources

import pytest

from blasius_cert import oracle, quasi
from blasius_cert.interval import DomainError, Enclosure
from blasius_cert.poly import exact_range

PRIME = 1000003


def _checksum(pairs):
    return sum(n for n, _ in pairs) % PRIME, sum(d for _, d in pairs) % PRIME


def test_coefficient_file_checksum():
    data = json.loads(resources.files("blasius_cert").joinpath("data/coefficients.json").read_text())
    base = data["base"]["p"]
    fam = [x for row in data["family"]["p"] for x in row]
    assert len(base) == 13
    assert len(fam) == 84
    assert _checksum(base) == (796167, 80546)
    assert _checksum(fam) == (893932, 410193)


def test_beta_substitution_exact():
    beta = quasi.beta_of_alpha()
    for k in range(-3, 4):
        a = Fr(k, 50)
        assert beta(a) == 25 * a / 3 + Fr(1, 2)


@pytest.mark.parametrize("k", range(21))
def test_initial_conditions_exact(k):
    alpha = quasi.ALPHA_MIN + (quasi.ALPHA_MAX - quasi.ALPHA_MIN) * Fr(k, 20)
    F, F1, F2 = quasi.build_inner(alpha, "family").values(0)
    assert (F, F1, F2) == (alpha, 0, 1)


def test_base_initial_conditions(base_inner):
    assert base_inner.values(0) == (0, 0, 1)
    assert base_inner.poly.degree == 16


def test_alpha_out_of_range():
    with pytest.raises(DomainError):
        quasi.build_inner(Fr(1, 10))
    with pytest.raises(DomainError):
        quasi.build_inner(Fr(1, 50), "base")


def test_wall_curvature_near_one(base_inner):
    r = exact_range(base_inner.d2, 0, Fr(1, 8))
    assert r.lo >= 0.99 and r.hi <= 1 + 2e-9


def test_inner_close_to_oracle_at_match(base_inner):
    traj = oracle.integrate(0, 0, 5.0)
    F = traj(2.5)
    for exact, ref in zip(base_inner.values(quasi.X_MATCH), F):
        assert abs(float(exact) - ref) <= 4e-6


def test_outer_c_zero_is_linear():
    a, b = Fr(3, 2), Fr(-1, 2)
    T = quasi.MatchTriple(Enclosure.of(a), Enclosure.of(b), Enclosure(0.0, 0.0), Fr(0), (a, b, Fr(0)))
    F, F1, F2 = quasi.f0_outer(4.0, T)
    assert F.contains(float(a * 4 + b)) and F1.contains(1.5) and F2.mag < 1e-300


def test_outer_derivative_tends_to_a():
    T = quasi.initial_triple(0)
    _, F1, F2 = quasi.f0_outer(100.0, T)
    assert abs(F1.mid - T.a.mid) < 1e-30 + F1.width + T.a.width
    assert F2.mag < 1e-30


def test_outer_domain():
    with pytest.raises(DomainError):
        quasi.f0_outer(1.0, quasi.initial_triple(0))


def test_inner_outer_agree_at_match(base_inner):
    T = quasi.initial_triple(0)
    outer = quasi.f0_outer(float(quasi.X_MATCH), T)
    for i, o in zip(base_inner.values(quasi.X_MATCH), outer):
        assert abs(float(i) - o.mid) < 2e-5


def test_t_m_base_bounds():
    tm = quasi.t_m_bounds_base()
    assert tm.lo == pytest.approx(1.998859, abs=1e-6)
    assert tm.hi == pytest.approx(1.999438, abs=1e-6)


def test_t_m_corners_inside():
    T = quasi.initial_triple(0)
    tm = quasi.t_m_bounds_base()
    a0, b0, _ = T.center
    r = T.rho0
    for a in (a0 - r, a0, a0 + r):
        for b in (b0 - 2 * r, b0, b0 + 2 * r):
            t = quasi.t_m_exact(a, b)
            assert Fr(tm.lo) <= t <= Fr(tm.hi)


def test_t_m_family_bounds():
    tm = quasi.t_m_bounds_family()
    assert tm.lo == pytest.approx(1.962257, abs=1e-6)
    assert tm.hi == pytest.approx(2.043219, abs=1e-6)


def test_match_triple_contains_center():
    T = quasi.initial_triple(Fr(1, 50))
    assert T.contains(*T.center)
    a0, b0, c0 = T.center
    assert not T.contains(a0 + 2 * T.rho0, b0, c0)
    assert len(list(T.corners())) == 8
