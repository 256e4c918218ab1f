import pytest
import sympy
from gmpy2 import mpq
from hypothesis import given, strategies as st

from qsuper.field import (
    FieldError,
    Poly,
    RatFun,
    homogenize,
    is_polynomial,
    lcm_denominators,
    normalize,
    parse_scalar,
    poly_gcd,
    poly_text,
    rational_roots,
    scalar_text,
)

u = Poly.gen("u")
one = Poly.const(1)


def P(*coeffs):
    return Poly(coeffs, "u")


# ---------------------------------------------------------------- strategies

small_rat = st.builds(mpq, st.integers(-9, 9), st.integers(1, 5))
polys = st.lists(small_rat, min_size=0, max_size=4).map(lambda c: Poly(c, "u"))
nonzero_polys = polys.filter(lambda p: not p.is_zero())
ratfuns = st.builds(RatFun, polys, nonzero_polys)
nonzero_ratfuns = st.builds(RatFun, nonzero_polys, nonzero_polys)


def to_sym(p: Poly):
    x = sympy.Symbol("u")
    return sympy.Poly(sum(sympy.Rational(int(c.numerator), int(c.denominator)) * x ** k
                          for k, c in enumerate(p.coeffs)), x, domain="QQ")


# ------------------------------------------------------------------ examples


def test_normalize_cancels_common_factor():
    assert normalize(RatFun._raw(P(-2, 0, 2), P(-2, 2))) == RatFun(u + 1)


def test_normalize_full_cancellation():
    r = normalize(RatFun._raw(P(-3, 1), P(-6, 2)))
    assert r.is_constant() and r.constant_value() == mpq(1, 2)


def test_normalize_identity_case():
    assert RatFun(u, u) == RatFun(one)


def test_zero_denominator_message():
    with pytest.raises(ZeroDivisionError, match="division by zero in function field"):
        RatFun(u, Poly(()))


def test_denominator_is_monic_and_coprime():
    r = RatFun(P(2, 2), P(-6, 0, 6))  # (2u+2)/(6u^2-6) = (1/3)/(u-1)
    assert r.den == P(-1, 1)
    assert r.num == Poly.const(mpq(1, 3))


@pytest.mark.parametrize("p, r, g", [
    (P(-1, 0, 1), P(-1, 1), P(-1, 1)),
    (u, u + 1, one),
    (P(-3, 3), P(-6, 6), P(-1, 1)),
])
def test_gcd_examples(p, r, g):
    assert poly_gcd(p, r) == g


def test_gcd_both_zero_raises():
    with pytest.raises(FieldError):
        poly_gcd(Poly(()), Poly(()))


def test_lcm_examples():
    d = P(-16, 1)
    assert lcm_denominators([RatFun(one, d), RatFun(u + 1, d)]) == d
    assert lcm_denominators([RatFun(u + 2), RatFun(Poly.const(3))]) == one


def test_lcm_empty_raises():
    with pytest.raises(ValueError):
        lcm_denominators([])


def test_rational_roots_examples():
    assert rational_roots(P(4, -5, 1)) == [1, 4]
    assert rational_roots(P(-16, 1)) == [16]
    q = mpq(2)
    assert rational_roots(Poly.from_roots([q ** 2, q ** 4])) == [4, 16]


def test_rational_roots_skips_irrational_and_counts_multiplicity():
    p = P(-2, 0, 1) * P(-3, 1) * P(-3, 1) * u
    assert rational_roots(p) == [0, 3, 3]


def test_text_forms():
    assert poly_text(P(4, -5, 1)) == "u^2 - 5*u + 4"
    assert scalar_text(mpq(5, 2)) == "5/2"
    assert scalar_text(mpq(3)) == "3/1"
    assert scalar_text(RatFun(P(2), P(-6, 2))) == "(1)/(u - 3)"
    assert homogenize(P(-16, 1)) == "a - 16*b"


# ---------------------------------------------------------------- properties


@given(polys, polys)
def test_poly_product_matches_sympy(p, r):
    assert to_sym(p * r) == to_sym(p) * to_sym(r)


@given(polys, nonzero_polys)
def test_poly_divmod(p, r):
    qt, rem = p.divmod(r)
    assert qt * r + rem == p
    assert rem.is_zero() or rem.degree < r.degree


@given(nonzero_polys, nonzero_polys)
def test_gcd_matches_sympy(p, r):
    g = sympy.gcd(to_sym(p), to_sym(r)).monic()
    assert to_sym(poly_gcd(p, r)) == g


@given(ratfuns, ratfuns, ratfuns)
def test_field_axioms(x, y, z):
    assert (x + y) + z == x + (y + z)
    assert (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z
    assert x + y == y + x and x * y == y * x
    assert x - x == RatFun(Poly(()))


@given(nonzero_ratfuns)
def test_inverse(x):
    assert x * x.inverse() == RatFun(one)
    assert RatFun(one) / x == x.inverse()


@given(polys, nonzero_polys)
def test_normalize_idempotent(p, r):
    x = RatFun(p, r)
    assert normalize(normalize(x)) == normalize(x)
    assert normalize(x).den.lc == 1


@given(st.lists(ratfuns, min_size=1, max_size=5))
def test_lcm_clears_denominators(entries):
    d = lcm_denominators(entries)
    assert all(is_polynomial(e * RatFun(d)) for e in entries)


@given(ratfuns)
def test_text_round_trip(x):
    assert parse_scalar(scalar_text(x), "u") == x


@given(small_rat)
def test_rational_round_trip(x):
    assert parse_scalar(scalar_text(x)) == x


@given(st.lists(st.builds(mpq, st.integers(-6, 6), st.integers(1, 3)), min_size=1, max_size=4))
def test_roots_of_product_of_linear_factors(roots):
    assert rational_roots(Poly.from_roots(roots)) == sorted(roots)


@given(polys, small_rat)
def test_evaluation_is_a_ring_map(p, c):
    x = sympy.Symbol("u")
    expect = to_sym(p).as_expr().subs(x, sympy.Rational(int(c.numerator), int(c.denominator)))
    assert p(c) == mpq(int(sympy.numer(expect)), int(sympy.denom(expect)))
