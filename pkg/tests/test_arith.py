import math
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from g2points.arith import squarefree_check
from g2points.arith.factor import factor_integer, is_probable_prime, is_square_mod_p, sqrt_mod_p
from g2points.arith.padic import PadicNumber, PrecisionError, series_from_poly, series_integrate, series_sqrt
from g2points.arith.poly import discriminant, gcd_q, is_squarefree, mul
from g2points.arith.sturm import real_root_count

from oracles import real_roots_bisection

small_poly = st.lists(st.integers(-20, 20), min_size=2, max_size=7).filter(lambda c: c[-1] != 0)


def test_squarefree_examples():
    assert squarefree_check((1, 0, 0, 0, 0, 0, 1))
    assert not squarefree_check(mul((-1, 1), mul((-1, 1), (2, 1))))
    assert squarefree_check((0, 54, 0, 28, 0, 6))


@given(small_poly)
def test_squarefree_matches_sympy(f):
    x = sympy.Symbol("x")
    g = sympy.Poly(list(reversed(f)), x)
    assert is_squarefree(tuple(f)) == (sympy.gcd(g, g.diff(x)).degree() == 0)


def test_real_root_count_examples():
    assert real_root_count((1, 0, 1)) == 0
    assert real_root_count((-2, 0, 1)) == 2
    assert real_root_count((0, 54, 0, 28, 0, 6)) == 1


@settings(max_examples=60, deadline=None)
@given(small_poly)
def test_real_root_count_matches_bisection(f):
    if not is_squarefree(tuple(f)):
        return
    assert real_root_count(tuple(f)) == real_roots_bisection(f)


def test_square_mod_p_examples():
    assert is_square_mod_p(4, 7) and sqrt_mod_p(4, 7) in (2, 5)
    assert not is_square_mod_p(3, 7)
    assert 3 not in {x * x % 7 for x in range(7)}
    assert is_square_mod_p(0, 7) and sqrt_mod_p(0, 7) == 0


@given(st.sampled_from([3, 5, 7, 13, 17, 101, 10007, 1000003]), st.integers(0, 10**9))
def test_sqrt_mod_p_squares_back(p, a):
    a %= p
    if is_square_mod_p(a, p):
        r = sqrt_mod_p(a, p)
        assert r * r % p == a
    else:
        assert pow(a, (p - 1) // 2, p) == p - 1


def test_factor_examples():
    assert factor_integer(1) == {}
    assert factor_integer(360) == {2: 3, 3: 2, 5: 1}
    n = 10**9 + 7
    assert all(n % d for d in range(2, math.isqrt(n) + 1))
    assert factor_integer(n) == {n: 1}


@given(st.integers(1, 10**15))
def test_factor_matches_sympy(n):
    assert factor_integer(n) == dict(sympy.factorint(n))


@given(st.integers(2, 10**12))
def test_primality_matches_sympy(n):
    assert is_probable_prime(n) == sympy.isprime(n)


def test_gcd_and_discriminant():
    assert gcd_q((-1, 0, 1), (1, 1)) == (1, 1)
    assert discriminant((-2, 0, 1)) == 8


# --- p-adic numbers and series ----------------------------------------------------------------


@given(st.sampled_from([5, 7, 11]), st.fractions(max_denominator=50), st.fractions(max_denominator=50))
def test_padic_ring_ops_agree_with_rationals(p, x, y):
    prec = 8
    a, b = PadicNumber.from_rational(x, p, prec), PadicNumber.from_rational(y, p, prec)
    for op in (lambda u, v: u + v, lambda u, v: u - v, lambda u, v: u * v):
        got, want = op(a, b), PadicNumber.from_rational(op(x, y), p, 40)
        if got.is_exact_zero():
            assert op(x, y) == 0
        else:
            assert got.eq_mod(want, got.prec)


def test_series_sqrt_of_one():
    s = series_from_poly((1,), 5, 6, 4)
    r = series_sqrt(s)
    assert r.coeffs[0].eq_mod(PadicNumber.from_rational(1, 5, 6), 6)
    assert all(c.is_zero() for c in r.coeffs[1:])


def test_series_sqrt_one_plus_t():
    p, prec = 7, 8
    r = series_sqrt(series_from_poly((1, 1), p, prec, 3))
    want = [Fraction(1), Fraction(1, 2), Fraction(-1, 8), Fraction(1, 16)]
    for c, w in zip(r.coeffs, want):
        assert c.eq_mod(PadicNumber.from_rational(w, p, prec), 6)
    sq = r * r
    assert sq.coeffs[0].eq_mod(PadicNumber.from_rational(1, p, prec), 6)
    assert sq.coeffs[1].eq_mod(PadicNumber.from_rational(1, p, prec), 6)
    for c in sq.coeffs[2:4]:
        assert c.is_zero() or c.val >= 6


def test_integrate_loses_precision_at_p():
    p = 2
    s = series_from_poly((1, 1), p, 6, 2)
    out = series_integrate(s)
    assert out.coeffs[1].eq_mod(PadicNumber.from_rational(1, p, 6), 6)
    assert out.coeffs[2].eq_mod(PadicNumber.from_rational(Fraction(1, 2), p, 5), 5)
    assert out.coeffs[2].prec < s.coeffs[1].prec
    with pytest.raises(PrecisionError):
        series_integrate(s, floor=6)
