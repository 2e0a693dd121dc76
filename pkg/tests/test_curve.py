import math
import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from g2points.curve import (
    HyperCurve,
    Point,
    count_points,
    enumerate_points,
    iota,
    search_rational_points,
    sort_points,
)

from oracles import count_points_naive, search_naive


def random_curve(rng, degree=None, bound=20):
    while True:
        d = degree or rng.choice([5, 6])
        f = [rng.randint(-bound, bound) for _ in range(d)] + [rng.choice([c for c in range(-bound, bound + 1) if c])]
        try:
            return HyperCurve(f)
        except ValueError:
            continue


def test_homogenize_examples():
    assert HyperCurve((1, 0, 0, 0, 0, 0, 1)).homogenize() == (1, 0, 0, 0, 0, 0, 1)
    # coefficients of X^i Z^(6-i): x^5 + 2 -> X^5 Z + 2 Z^6
    assert HyperCurve((2, 0, 0, 0, 0, 1)).homogenize() == (2, 0, 0, 0, 0, 1, 0)
    assert HyperCurve((0, 54, 0, 28, 0, 6)).homogenize() == (0, 54, 0, 28, 0, 6, 0)


def test_good_reduction():
    C = HyperCurve((1, 0, 0, 0, 0, 0, 1))
    x = sympy.Symbol("x")
    disc = sympy.discriminant(x**6 + 1, x)
    assert disc % 5 != 0 and C.is_good_reduction(5)
    assert not C.is_good_reduction(2)
    with pytest.raises(ValueError):
        HyperCurve((0, 0, 1, 0, 0, 1))


def test_enumerate_small_example():
    C = HyperCurve((1, 0, 0, 0, 0, 1))
    pts = enumerate_points(C, 3)
    assert sorted(map(str, pts)) == sorted(["(0, 1)", "(0, 2)", "(2, 0)", "inf"])
    assert count_points(C, 3) == 4


def test_infinity_points_over_f5():
    pts = enumerate_points(HyperCurve((1, 0, 0, 0, 0, 0, 1)), 5)
    assert {q.inf for q in pts if q.inf} == {"inf+", "inf-"}


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([3, 5, 7, 11, 13, 17, 19, 23]))
def test_point_count_matches_naive_and_weil(seed, p):
    C = random_curve(random.Random(seed))
    if not C.is_good_reduction(p):
        return
    n = count_points(C, p)
    assert n == count_points_naive(C.f, p) == len(enumerate_points(C, p))
    assert abs(n - (p + 1)) <= 4 * math.sqrt(p)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([3, 5, 7]))
def test_point_count_over_fp2(seed, p):
    C = random_curve(random.Random(seed))
    if not C.is_good_reduction(p):
        return
    n2 = count_points(C, p, 2)
    assert n2 == len(enumerate_points(C, p, 2))
    assert abs(n2 - (p * p + 1)) <= 4 * p


def test_search_examples():
    pts = search_rational_points(HyperCurve((1, 0, 0, 0, 0, 0, 1)), 1)
    assert sorted(map(str, pts)) == sorted(["(0, 1)", "(0, -1)", "inf+", "inf-"])
    assert search_rational_points(HyperCurve((-1, 0, 0, 0, 0, 0, -1)), 30) == []
    pts = search_rational_points(HyperCurve((0, 54, 0, 28, 0, 6)), 2)
    assert sorted(map(str, pts)) == ["(0, 0)", "inf"]


def _as_oracle(pts):
    return {q.inf if q.inf else (q.x, q.y) for q in pts}


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6))
def test_search_matches_naive(seed):
    rng = random.Random(seed)
    C = random_curve(rng, bound=6)
    assert _as_oracle(search_rational_points(C, 12)) == search_naive(C.f, 12)


def test_search_gordon_grant():
    C = HyperCurve((0, 60, -112, 65, -14, 1))
    pts = search_rational_points(C, 60)
    assert _as_oracle(pts) == search_naive(C.f, 60)
    assert len(pts) == 10


def test_iota_and_sorting():
    C = HyperCurve((0, 60, -112, 65, -14, 1))
    Q = Point(Fraction(3), Fraction(6))
    assert C.contains(Q) and C.contains(iota(Q)) and iota(iota(Q)) == Q
    pts = sort_points(search_rational_points(C, 20))
    assert sort_points(reversed(pts)) == pts
    assert Point.from_json(Q.to_json()) == Q
