"""Exact polynomial arithmetic, Chebyshev conversion, range bounds and sign isolation."""

import random
from fractions import Fraction as Fr

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blasius_cert import poly
from blasius_cert.poly import BiRationalPoly, DegenerateInputError, RationalPoly

rationals = st.fractions(min_value=-10, max_value=10, max_denominator=1000)
polys = st.lists(rationals, min_size=1, max_size=9).map(RationalPoly)
nonzero = rationals.filter(lambda q: q != 0)


def test_mul_difference_of_squares():
    assert poly.poly_arith(RationalPoly([1, 1]), RationalPoly([-1, 1]), "mul") == RationalPoly([-1, 0, 1])


def test_derivative_and_antiderivative():
    p = RationalPoly([1, 2, 3])
    assert poly.poly_arith(p, None, "derivative") == RationalPoly([2, 6])
    assert poly.poly_arith(p, None, "antiderivative") == RationalPoly([0, 1, 1, 1])
    assert p.integrate(0, 1) == 3


def test_unknown_op():
    with pytest.raises(ValueError):
        poly.poly_arith(RationalPoly([1]), None, "pow")


def test_compose_affine_identity():
    p = RationalPoly([0, 0, 1])
    assert poly.compose_affine(p, 1, 0) == p


def test_compose_affine_chebyshev_endpoint():
    T2 = RationalPoly([-1, 0, 2])
    q = poly.compose_affine(T2, Fr(4, 5), -1)
    assert q(Fr(5, 2)) == 1


def test_compose_affine_zero_scale():
    with pytest.raises(DegenerateInputError):
        poly.compose_affine(RationalPoly([1, 1]), 0, 1)


@settings(max_examples=200, deadline=None)
@given(polys, nonzero, rationals, rationals)
def test_compose_affine_exact(p, s, t, tau):
    assert poly.compose_affine(p, s, t)(tau) == p(t + s * tau)


@settings(max_examples=100, deadline=None)
@given(polys, rationals, st.fractions(min_value=Fr(1, 100), max_value=5, max_denominator=100))
def test_chebyshev_round_trip(p, lo, width):
    I = (lo, lo + width)
    assert poly.from_chebyshev(poly.to_chebyshev(p, I), I) == p


def test_chebyshev_constant_and_identity():
    assert poly.to_chebyshev(RationalPoly([1]), (0, Fr(5, 2))) == [1]
    assert poly.to_chebyshev(RationalPoly([0, 1]), (-1, 1)) == [0, 1]


def test_chebyshev_l1_bounds_sup():
    p = RationalPoly([Fr(1, 3), -2, 0, 5, -1])
    s = poly.chebyshev_l1(p, (0, 1))
    assert all(abs(p(Fr(k, 97))) <= s for k in range(98))


def test_range_bound_cubic_monotone():
    rb = poly.range_bound_cubic_tail(RationalPoly([0, 0, 0, 1]), (-1, 1))
    assert -1.0 - 1e-15 <= rb.lo <= -1.0 and 1.0 <= rb.hi <= 1.0 + 1e-15


def test_range_bound_quartic_tail():
    rb = poly.range_bound_cubic_tail(RationalPoly([0, 0, 0, 0, 1]), (-1, 1))
    assert -1.0 - 1e-15 <= rb.lo <= 0.0 and 1.0 <= rb.hi <= 1.0 + 1e-15


@settings(max_examples=50, deadline=None)
@given(polys, rationals, st.fractions(min_value=Fr(1, 50), max_value=3, max_denominator=50))
def test_range_soundness(p, lo, width):
    hi = lo + width
    rb = poly.range_bound_cubic_tail(p, (lo, hi))
    tight = poly.range_bound(p, lo, hi)
    rng = random.Random(0)
    for _ in range(1000):
        x = lo + (hi - lo) * Fr(rng.randint(0, 10**6), 10**6)
        v = float(p(x))
        assert rb.lo <= v <= rb.hi
        assert tight.lo <= v <= tight.hi


@settings(max_examples=50, deadline=None)
@given(polys, rationals, st.fractions(min_value=Fr(1, 50), max_value=3, max_denominator=50))
def test_range_bound_shrinks_under_bisection(p, lo, width):
    hi = lo + width
    m = (lo + hi) / 2
    whole = poly.range_bound_cubic_tail(p, (lo, hi))
    for cell in ((lo, m), (m, hi)):
        half = poly.range_bound_cubic_tail(p, cell)
        assert half.hi - half.lo <= (whole.hi - whole.lo) * (1 + 1e-12) + 1e-300


def test_exact_range_quadratic():
    p = RationalPoly([0, -1, 1])  # min -1/4 at 1/2
    r = poly.exact_range(p, 0, 2)
    assert r.lo <= -0.25 <= r.lo + 1e-15
    assert r.hi == 2.0


def test_abs_sup_bound_brackets():
    p = RationalPoly([Fr(1, 10), -3, 0, 4])  # 4x^3 - 3x + 1/10 on [-1, 1], sup |p| = 1.1
    sampled, cert = poly.abs_sup_bound(p, -1, 1, rel_tol=1e-6)
    assert sampled <= 1.1 <= cert
    assert cert - 1.1 < 1e-5


def test_isolate_linear_root():
    sc = poly.isolate_sign_changes(RationalPoly([0, 1]), (-1, 1))
    assert len(sc) == 1 and sc[0].lo <= 0 <= sc[0].hi


def test_isolate_no_real_root():
    assert poly.isolate_sign_changes(RationalPoly([1, 0, 1]), (0, 1)) == []


def test_isolate_even_root_dropped():
    p = RationalPoly([Fr(1, 4), -1, 1])  # (x - 1/2)^2
    assert poly.isolate_sign_changes(p, (0, 1)) == []


def test_isolate_cubic_three_roots():
    p = RationalPoly([0, -1, 0, 1])  # roots -1, 0, 1
    sc = poly.isolate_sign_changes(p, (Fr(-3, 2), Fr(3, 2)), tol=Fr(1, 10**6))
    assert len(sc) == 3
    for r, s in zip((-1, 0, 1), sc):
        assert s.lo <= r <= s.hi


def test_isolate_zero_poly_rejected():
    with pytest.raises(DegenerateInputError):
        poly.isolate_sign_changes(RationalPoly(), (0, 1))


def test_positive_part_integral():
    # (x - 1)^+ on [0, 2] has integral 1/2
    v = poly.positive_part_integral(RationalPoly([-1, 1]), 0, 2)
    assert Fr(1, 2) <= v <= Fr(1, 2) + Fr(1, 10**9)
    assert poly.positive_part_integral(RationalPoly([-1]), 0, 1) == 0


def test_positive_part_degenerate_interval():
    with pytest.raises(DegenerateInputError):
        poly.positive_part_integral(RationalPoly([1]), 1, 1)


def test_sturm_primitive_parts_are_integral():
    p = RationalPoly([Fr(1, 3), Fr(-5, 7), Fr(2, 9), 1])
    for q in poly.sturm_sequence(p):
        assert all(Fr(c).denominator == 1 for c in q.coeffs)


def test_bivariate_evaluation_and_derivatives():
    # p = x^2 alpha + 3 x - alpha^2
    B = BiRationalPoly([[0, 0, -1], [3], [0, 1]])
    assert B(2, 5) == 4 * 5 + 6 - 25
    assert B.deriv_alpha()(2, 5) == 4 - 10
    assert B.deriv_x()(2, 5) == 2 * 2 * 5 + 3
    assert B.at_x(2)(5) == B(2, 5)
    assert B.integrate_x(0, 1)(5) == Fr(5, 3) + Fr(3, 2) - 25


def test_bivariate_box_bounds():
    B = BiRationalPoly([[0, 0, -1], [3], [0, 1]])
    s = B.sup_abs_bound((0, 1), (-1, 1))
    c = B.chebyshev_l1((0, 1), (-1, 1))
    for i in range(11):
        for j in range(11):
            v = abs(B(Fr(i, 10), Fr(2 * j - 10, 10)))
            assert v <= s and v <= c
