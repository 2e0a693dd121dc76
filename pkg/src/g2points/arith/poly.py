"""Univariate polynomials as coefficient tuples, lowest degree first.

The zero polynomial is ``()`` and has degree -1. Integer and rational
polynomials use plain ``int``/``Fraction`` coefficients; polynomials over a
finite field go through a field object (see :mod:`g2points.arith.fields`).
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

Poly = tuple


def trim(c: Sequence) -> Poly:
    n = len(c)
    while n and c[n - 1] == 0:
        n -= 1
    return tuple(c[:n])


def deg(f: Poly) -> int:
    return len(f) - 1


def lc(f: Poly):
    return f[-1] if f else 0


def add(f: Poly, g: Poly) -> Poly:
    if len(f) < len(g):
        f, g = g, f
    out = list(f)
    for i, c in enumerate(g):
        out[i] += c
    return trim(out)


def neg(f: Poly) -> Poly:
    return tuple(-c for c in f)


def sub(f: Poly, g: Poly) -> Poly:
    return add(f, neg(g))


def scale(f: Poly, c) -> Poly:
    return trim([c * x for x in f])


def mul(f: Poly, g: Poly) -> Poly:
    if not f or not g:
        return ()
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                out[i + j] += a * b
    return trim(out)


def power(f: Poly, n: int) -> Poly:
    out: Poly = (1,)
    for _ in range(n):
        out = mul(out, f)
    return out


def evaluate(f: Poly, x):
    acc = 0
    for c in reversed(f):
        acc = acc * x + c
    return acc


def derivative(f: Poly) -> Poly:
    return trim([i * f[i] for i in range(1, len(f))])


def compose_linear(f: Poly, a, b) -> Poly:
    """Return f(a + b*x)."""
    out: Poly = ()
    for c in reversed(f):
        out = add(mul(out, (a, b)), (c,))
    return out


def reverse(f: Poly, n: int) -> Poly:
    """x^n f(1/x) for n >= deg f."""
    c = list(f) + [0] * (n + 1 - len(f))
    return trim(c[::-1])


def content(f: Poly) -> int:
    g = 0
    for c in f:
        g = math.gcd(g, int(c))
    return g


def divmod_q(f: Poly, g: Poly) -> tuple[Poly, Poly]:
    """Division with remainder over the rationals."""
    if not g:
        raise ZeroDivisionError("polynomial division by zero")
    r = [Fraction(c) for c in f]
    q = [Fraction(0)] * max(len(f) - len(g) + 1, 0)
    inv = Fraction(1) / Fraction(g[-1])
    dg = len(g) - 1
    for i in range(len(r) - 1, dg - 1, -1):
        c = r[i] * inv
        if c:
            q[i - dg] = c
            for j, b in enumerate(g):
                r[i - dg + j] -= c * b
    return trim(q), trim(r[:dg])


def gcd_q(f: Poly, g: Poly) -> Poly:
    """Monic gcd over the rationals."""
    f = trim([Fraction(c) for c in f])
    g = trim([Fraction(c) for c in g])
    while g:
        f, g = g, divmod_q(f, g)[1]
    if not f:
        return ()
    return tuple(c / f[-1] for c in f)


def is_squarefree(f: Poly) -> bool:
    if not f:
        raise ValueError("zero polynomial")
    return deg(gcd_q(f, derivative(f))) == 0


def resultant(f: Poly, g: Poly) -> Fraction:
    """Resultant over the rationals via the Euclidean recursion."""
    f = trim([Fraction(c) for c in f])
    g = trim([Fraction(c) for c in g])
    if not f or not g:
        return Fraction(0)
    res = Fraction(1)
    while True:
        m, n = deg(f), deg(g)
        if n == 0:
            return res * g[0] ** m
        r = divmod_q(f, g)[1]
        if not r:
            return Fraction(0)
        # Res(f, g) = (-1)^{mn} lc(g)^{m - deg r} Res(g, r)
        if (m * n) % 2:
            res = -res
        res *= g[-1] ** (m - deg(r))
        f, g = g, r


def discriminant(f: Poly) -> Fraction:
    n = deg(f)
    sign = -1 if (n * (n - 1) // 2) % 2 else 1
    return sign * resultant(f, derivative(f)) / f[-1]


def binary_form_discriminant(f: Poly, n: int) -> int:
    """Discriminant of F(x, z) = z^n f(x/z) as a degree-n binary form."""
    d = discriminant(f)
    gap = n - deg(f)
    if gap == 0:
        out = d
    elif gap == 1:
        out = Fraction(f[-1]) ** 2 * d
    else:
        out = Fraction(0)
    assert out.denominator == 1
    return int(out)


def to_str(f: Poly, var: str = "x") -> str:
    terms = []
    for i in range(len(f) - 1, -1, -1):
        c = f[i]
        if c == 0:
            continue
        mon = "" if i == 0 else (var if i == 1 else f"{var}^{i}")
        if mon and c == 1:
            terms.append(mon)
        elif mon and c == -1:
            terms.append("-" + mon)
        else:
            terms.append(f"{c}*{mon}" if mon else str(c))
    return " + ".join(terms).replace("+ -", "- ") if terms else "0"
