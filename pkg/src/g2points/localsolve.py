"""Everywhere local solvability of y^2 = f(x) over Q.

Only finitely many places need an actual computation: the real place, p = 2,
odd primes below 4g^2 - 2, odd primes dividing the content of f, and odd
primes at which f reduces to a non-square constant times a square. At every
other odd prime the reduction has a smooth point (Weil bound) which lifts.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction

from .arith.factor import factor_integer, is_square_mod_p, valuation
from .arith.poly import compose_linear, content, deg, derivative, evaluate, resultant, reverse, trim
from .arith.sturm import real_root_count


class RecursionCapExceeded(RuntimeError):
    """The descent went deeper than squarefreeness allows; this is a bug."""


@dataclass(frozen=True)
class PlaceReport:
    place: object  # "real", "all" or a prime
    solvable: bool
    method: str

    def to_json(self):
        return asdict(self)


def _ints(f) -> tuple:
    return trim([int(c) for c in f])


def _form_degree(f) -> int:
    d = deg(f)
    return d + (d % 2)


def _vp(n: int, p: int) -> int:
    return valuation(n, p) if n else math.inf


def _poly_val(f, p: int):
    return min((_vp(c, p) for c in f), default=math.inf)


def _shift_scale(f, a: int, p: int, k: int) -> tuple:
    """p^(-k) f(a + p x); the caller guarantees divisibility."""
    g = compose_linear(f, a, p)
    pk = p**k
    assert all(c % pk == 0 for c in g)
    return trim([c // pk for c in g])


def _chart_infinity(f, n: int, p: int, k: int) -> tuple:
    """p^(-k) F(1, p x) where F is the degree-n homogenisation of f."""
    F1 = reverse(f, n)
    pk = p**k
    g = [c * p**i for i, c in enumerate(F1)]
    assert all(c % pk == 0 for c in g)
    return trim([c // pk for c in g])


def _depth_cap(g, p: int) -> int:
    """Recursion depth bound from the p-adic valuation of Res(g, g')."""
    g = _ints(g)
    if deg(g) <= 0:
        return _vp(g[0], p) + 3 if g else 3
    res = resultant(g, derivative(g))
    v = _vp(res.numerator, p) if res else 0
    return 2 * v + 3


def has_real_points(f) -> bool:
    f = _ints(f)
    return not (real_root_count(f) == 0 and f[0] < 0)


def lip_odd(f, p: int) -> bool:
    """Solutions of y^2 = f(x) with x, y p-adic integers, p odd."""
    f = _ints(f)
    cap = _depth_cap(f, p)
    level, depth = [f], 0
    while level:
        if depth > cap:
            raise RecursionCapExceeded(f"LIP depth {depth} at p = {p}")
        nxt = []
        for h in level:
            hb = trim([c % p for c in h])
            hd = derivative(hb)
            for xi in range(p):
                v = evaluate(hb, xi) % p
                if v and is_square_mod_p(v, p):
                    return True
                if v:
                    continue
                if evaluate(hd, xi) % p:
                    return True
                if evaluate(h, xi) % (p * p) == 0:
                    nxt.append(_shift_scale(h, xi, p, 2))
        level, depth = nxt, depth + 1
    return False


def sop(f, p: int) -> bool:
    """C(Q_p) nonempty, p odd, for the curve given by y^2 = f(x)."""
    f = _ints(f)
    n = deg(f)
    if n % 2:
        return True
    fb = trim([c % p for c in f])
    if deg(fb) == n and is_square_mod_p(fb[-1], p):
        return True
    if deg(fb) == n - 1:
        return True
    if f[-1] % (p * p) == 0 and lip_odd(_chart_infinity(f, n, p, 2), p):
        return True
    return lip_odd(f, p)


def lipe_even(c: int, f) -> bool:
    """Solutions of y^2 + c y = f(x) in 2-adic integers."""
    f = _ints(f)
    g = add_const(trim([4 * x for x in f]), c * c)
    cap = _depth_cap(g, 2)
    level, depth = [(c, f)], 0
    while level:
        if depth > cap:
            raise RecursionCapExceeded(f"LIPE depth {depth}")
        nxt = []
        for c1, h in level:
            if c1 % 2:
                # y^2 + y = t is solvable over F_2 exactly when t = 0
                for xi in (0, 1):
                    if evaluate(h, xi) % 2 == 0:
                        return True
                continue
            hd = derivative(h)
            for xi in (0, 1):
                if evaluate(hd, xi) % 2:
                    return True
                eta = evaluate(h, xi) % 2
                t = evaluate(h, xi) - eta * eta - c1 * eta
                if t % 4 == 0:
                    shifted = compose_linear(h, xi, 2)
                    shifted = add_const(shifted, -eta * eta - c1 * eta)
                    assert all(x % 4 == 0 for x in shifted)
                    nxt.append(((2 * eta + c1) // 2, trim([x // 4 for x in shifted])))
        level, depth = nxt, depth + 1
    return False


def add_const(f, a: int) -> tuple:
    if not f:
        return trim([a])
    return trim([f[0] + a] + list(f[1:]))


def ep(f) -> bool:
    """C(Q_2) nonempty for y^2 = f(x)."""
    f = _ints(f)
    n = deg(f)
    if n % 2:
        return True
    if lipe_even(0, f):
        return True
    return lipe_even(0, _chart_infinity(f, n, 2, 0))


def solve_at_content_prime(f, p: int) -> bool:
    f = _ints(f)
    if p == 2 or any(c % p for c in f):
        raise ValueError(f"{p} must be odd and divide every coefficient")
    n = _form_degree(f)
    m = _poly_val(f, p)
    f1 = trim([c // p**m for c in f])
    if m % 2 == 0:
        return sop(f1, p) if deg(f1) % 2 == 0 else True
    f1b = trim([c % p for c in f1])
    for xi in range(p):
        if evaluate(f1b, xi) % p == 0 and lip_odd(_shift_scale(f1, xi, p, 1), p):
            return True
    if deg(f1b) < n and lip_odd(_chart_infinity(f1, n, p, 1), p):
        return True
    return False


def square_part(f) -> tuple[tuple, tuple]:
    """(q, r): q monic of degree g+1 with deg(f - c q^2) <= g, r = f - c q^2."""
    f = _ints(f)
    n = deg(f)
    if n % 2 or not f:
        raise ValueError("need even degree")
    c = Fraction(f[-1])
    h = n // 2
    q = [Fraction(0)] * h + [Fraction(1)]
    for j in range(h - 1, -1, -1):
        s = sum(q[i] * q[h + j - i] for i in range(j + 1, h + 1) if h + j - i > j)
        q[j] = (f[h + j] / c - s) / 2
    cq2 = [Fraction(0)] * (n + 1)
    for i, a in enumerate(q):
        for k, b in enumerate(q):
            cq2[i + k] += c * a * b
    r = trim([Fraction(f[i]) - cq2[i] for i in range(n + 1)])
    assert deg(r) <= h - 1
    return tuple(q), r


def nonsquare_square_prime_candidates(f) -> set[int]:
    f = _ints(f)
    c = f[-1]
    if c == 0 or deg(f) % 2:
        raise ValueError("need even degree with nonzero leading coefficient")
    _, r = square_part(f)
    num = 0
    for x in r:
        num = math.gcd(num, x.numerator)
    out = {p for p in factor_integer(num) if (2 * c) % p} if num else set()
    top = math.gcd(f[-1], f[-2]) if len(f) > 1 else abs(c)
    out |= {p for p in factor_integer(abs(top)) if p != 2}
    return out


def _reduce_frac_poly(q, p: int) -> tuple:
    return trim([x.numerator * pow(x.denominator, -1, p) % p for x in q])


def solve_at_nonsquare_square_prime(f, p: int) -> bool:
    f = _ints(f)
    c = f[-1]
    if p == 2 or (2 * c) % p == 0:
        raise ValueError(f"{p} must be odd and prime to 2c")
    q, r = square_part(f)
    if _reduce_frac_poly(r, p):
        raise ValueError(f"f is not c*q^2 modulo {p}")
    if is_square_mod_p(c, p):
        return True
    qb = _reduce_frac_poly(q, p)
    for xi in range(p):
        if evaluate(qb, xi) % p:
            continue
        shifted = compose_linear(f, xi, p)
        if all(x % (p * p) == 0 for x in shifted) and sop(trim([x // (p * p) for x in shifted]), p):
            return True
    return False


def content_primes(f) -> list[int]:
    g = content(_ints(f))
    return [p for p in factor_integer(abs(g)) if p != 2] if abs(g) > 1 else []


def critical_places(f) -> list:
    """The real place, 2, odd p < 4g^2 - 2, and the two special classes of odd
    primes; at all other odd primes a local point exists."""
    f = _ints(f)
    g = (deg(f) - 1) // 2
    small = [p for p in range(3, 4 * g * g - 2) if _is_prime(p)]
    odd = set(small) | set(content_primes(f))
    if deg(f) % 2 == 0:
        odd |= nonsquare_square_prime_candidates(f)
    return ["real", 2] + sorted(odd)


def _is_prime(n: int) -> bool:
    return n > 1 and all(n % d for d in range(2, math.isqrt(n) + 1))


def solve_place(f, place) -> PlaceReport:
    f = _ints(f)
    g = (deg(f) - 1) // 2
    if place == "real":
        return PlaceReport("real", has_real_points(f), "real-test")
    p = place
    if p == 2:
        return PlaceReport(2, ep(f), "EP")
    if content(f) % p == 0:
        return PlaceReport(p, solve_at_content_prime(f, p), "f̄-zero-procedure")
    if p < 4 * g * g - 2 or (f[-1] % p == 0 and f[-2] % p == 0):
        return PlaceReport(p, sop(f, p), "SOP")
    fb = trim([c % p for c in f])
    _, r = square_part(f)
    if (2 * f[-1]) % p and not _reduce_frac_poly(r, p):
        return PlaceReport(p, solve_at_nonsquare_square_prime(f, p), "nonsquare-square-procedure")
    assert fb
    return PlaceReport(p, True, "large-prime-weil")


def is_els(f) -> tuple[bool, list[PlaceReport]]:
    f = _ints(f)
    if deg(f) % 2:
        return True, [PlaceReport("all", True, "infinity-point")]
    reports = []
    for place in critical_places(f):
        reports.append(solve_place(f, place))
    return all(r.solvable for r in reports), reports
