"""Matching map, fixed point, contraction check and the Jacobian diagnostic."""

from dataclasses import replace
from fractions import Fraction as Fr

import pytest

from blasius_cert import matching as mt
from blasius_cert import quasi
from blasius_cert.interval import DomainError, Enclosure

PUBLISHED = (1.6551904561499, -1.565439826457, 0.233728727537)


@pytest.fixture(scope="module")
def base_fp():
    return mt.fixed_point(0)


def test_residual_at_initial_base():
    r = mt.residual_at_initial(0)
    assert r.hi <= 1.16e-5


def test_contraction_base():
    con = mt.verify_contraction(mt.MatchState.initial(0))
    assert con.certified
    assert con.alpha_c == 0.764 and con.rho0 == Fr(5, 10**5)
    assert con.residual_margin > 0 and con.jacobian_margin > 0
    assert con.rigorous is False


def test_contraction_sabotage_small_radius():
    # (1 - 0.764) * 5e-6 = 1.18e-6 lies below the A0 residual
    con = mt.verify_contraction(mt.MatchState.initial(0), rho0=Fr(5, 10**6))
    assert not con.certified
    assert con.residual_margin < 0


def test_contraction_sabotage_factor():
    con = mt.verify_contraction(mt.MatchState.initial(0), alpha_c=0.5)
    assert not con.certified


def test_fixed_point_digits(base_fp):
    assert base_fp.converged
    for v, ref in zip(base_fp.state.abc_float, PUBLISHED):
        assert abs(v - ref) <= 1e-12 * abs(ref) * 5


def test_fixed_point_geometric(base_fp):
    r = base_fp.ratios
    assert all(x <= 0.9 for x in r[1:])


def test_iterates_stay_in_trust_region():
    T = quasi.initial_triple(0)
    st = mt.MatchState.initial(0)
    for _ in range(20):
        st = mt.apply_N(st)
        a, b, c = st.abc_float
        assert T.contains(a, b, c)
        st = replace(st, A=tuple(Enclosure(v.mid, v.mid) for v in st.A))


def test_fixed_point_is_fixed(base_fp):
    nxt = mt.apply_N(base_fp.state)
    assert nxt.residual_norm.hi < 1e-13


def test_wall_stress(base_fp):
    ws, wo = base_fp.state.wall_stress()
    assert abs(ws.mid - 0.469600) <= 0.000022
    assert abs(wo.mid - 0.3320574) <= 0.000016


def test_jacobian_below_factor():
    j = mt.jacobian_norm(mt.MatchState.initial(0))
    assert j.norm2.hi < 0.764
    assert j.rigorous is False
    assert len(j.entries) == 3 and all(len(r) == 3 for r in j.entries)


def test_jacobian_of_identity_like_map_is_sane():
    # a finite-difference Jacobian must be insensitive to the step within a decade
    st = mt.MatchState.initial(0)
    j1 = mt.jacobian_norm(st, 1e-5).norm2.mid
    j2 = mt.jacobian_norm(st, 1e-6).norm2.mid
    assert abs(j1 - j2) < 1e-4


def test_weighted_norm_zero():
    A = (Enclosure(1.0, 1.0),) * 3
    assert mt.weighted_norm(A, A).hi == 0.0


def test_N_map_domain():
    with pytest.raises(DomainError):
        mt.N_map(-1.0, -1.5, 0.2)
    with pytest.raises(mt.TrustRegionBreach):
        mt.N_map(1.6, -1.5, 0.3)
    with pytest.raises(DomainError):
        mt.N_map(1.6, -1.5, 0.0)


def test_unsupported_mode():
    with pytest.raises(ValueError):
        mt.apply_N(mt.MatchState.initial(0), mode="full")


def test_alpha_grid():
    g = mt.alpha_grid(13)
    assert g[0] == Fr(-3, 50) and g[-1] == Fr(3, 50) and len(g) == 13
    assert Fr(0) in g


def test_match_one_fiftieth_within_trust_region():
    fp = mt.fixed_point(Fr(1, 50))
    T = quasi.initial_triple(Fr(1, 50))
    assert fp.converged
    assert T.contains(*fp.state.abc_float)


@pytest.mark.parametrize("alpha", [Fr(-3, 50), Fr(0), Fr(3, 50)])
def test_family_contraction(alpha):
    con = mt.verify_contraction(mt.MatchState.initial(alpha, "family"))
    assert con.certified
    assert con.residual.hi <= 4.15e-5
