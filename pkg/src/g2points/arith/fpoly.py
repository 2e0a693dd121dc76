"""Small-degree polynomial kernels over F_p on tuples of ints.

These mirror the generic field-polynomial functions but skip the field
object dispatch; they are the inner loop of Jacobian arithmetic mod p.
"""

from __future__ import annotations


def trim(c) -> tuple:
    n = len(c)
    while n and not c[n - 1]:
        n -= 1
    return tuple(c[:n])


def add(a, b, p):
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, x in enumerate(b):
        out[i] = (out[i] + x) % p
    return trim(out)


def sub(a, b, p):
    n = max(len(a), len(b))
    out = [0] * n
    for i, x in enumerate(a):
        out[i] = x
    for i, x in enumerate(b):
        out[i] = (out[i] - x) % p
    return trim(out)


def neg(a, p):
    return tuple((-x) % p for x in a)


def scale(a, c, p):
    return trim([x * c % p for x in a])


def mul(a, b, p):
    if not a or not b:
        return ()
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return trim([x % p for x in out])


def divmod_(a, b, p):
    db = len(b) - 1
    if len(a) - 1 < db:
        return (), tuple(a)
    r = list(a)
    q = [0] * (len(a) - db)
    lead = b[-1]
    inv = 1 if lead == 1 else pow(lead, -1, p)
    low = b[:db]
    for i in range(len(r) - 1, db - 1, -1):
        c = r[i] * inv % p
        if c:
            q[i - db] = c
            off = i - db
            for j, bj in enumerate(low):
                r[off + j] -= c * bj
        # entries below i are reduced lazily
        if i > db:
            r[i - 1] %= p
    rem = [x % p for x in r[:db]]
    return trim(q), trim(rem)


def mod(a, b, p):
    if len(a) < len(b):
        return tuple(a)
    return divmod_(a, b, p)[1]


def monic(a, p):
    inv = pow(a[-1], -1, p)
    return tuple(x * inv % p for x in a)


def xgcd(a, b, p):
    """(d, s, t) with d = s a + t b monic."""
    r0, r1 = tuple(a), tuple(b)
    s0, s1 = (1,), ()
    t0, t1 = (), (1,)
    while r1:
        q, r = divmod_(r0, r1, p)
        r0, r1 = r1, r
        s0, s1 = s1, sub(s0, mul(q, s1, p), p)
        t0, t1 = t1, sub(t0, mul(q, t1, p), p)
    inv = pow(r0[-1], -1, p)
    return scale(r0, inv, p), scale(s0, inv, p), scale(t0, inv, p)


def inverse_mod(a, m, p):
    """(d, s) with d = gcd(a, m) monic and s a = d modulo m."""
    r0, r1 = tuple(m), mod(a, m, p)
    s0, s1 = (), (1,)
    if not r1:
        return monic(r0, p), ()
    while r1:
        q, r = divmod_(r0, r1, p)
        r0, r1 = r1, r
        s0, s1 = s1, sub(s0, mul(q, s1, p), p)
    inv = pow(r0[-1], -1, p)
    return scale(r0, inv, p), scale(s0, inv, p)
