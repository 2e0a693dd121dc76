"""Coefficient fields (Q, F_p, F_{p^2}) and polynomial arithmetic over them."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .factor import is_square_mod_p, least_nonresidue, sqrt_mod_p


class RationalField:
    char = 0
    zero = Fraction(0)
    one = Fraction(1)

    def __call__(self, x) -> Fraction:
        return Fraction(x)

    def red(self, x):
        return x

    def inv(self, x) -> Fraction:
        return 1 / Fraction(x)

    def is_square(self, x) -> bool:
        x = Fraction(x)
        if x < 0:
            return False
        return _isqrt_exact(x.numerator) is not None and _isqrt_exact(x.denominator) is not None

    def sqrt(self, x) -> Fraction:
        x = Fraction(x)
        n, d = _isqrt_exact(x.numerator), _isqrt_exact(x.denominator)
        if x < 0 or n is None or d is None:
            raise ValueError(f"{x} is not a rational square")
        return Fraction(n, d)

    def __eq__(self, other):
        return isinstance(other, RationalField)

    def __hash__(self):
        return hash("QQ")

    def __repr__(self):
        return "QQ"


def _isqrt_exact(n: int):
    import math

    if n < 0:
        return None
    r = math.isqrt(n)
    return r if r * r == n else None


QQ = RationalField()


class PrimeField:
    """F_p with elements represented by ints in [0, p)."""

    def __init__(self, p: int):
        self.p = p
        self.char = p
        self.zero = 0
        self.one = 1

    def __call__(self, x) -> int:
        if isinstance(x, Fraction):
            if x.denominator % self.p == 0:
                raise ZeroDivisionError(f"{x} is not {self.p}-integral")
            return x.numerator * pow(x.denominator, -1, self.p) % self.p
        return int(x) % self.p

    def red(self, x) -> int:
        return x % self.p

    def inv(self, x) -> int:
        return pow(x, -1, self.p)

    def is_square(self, x) -> bool:
        return is_square_mod_p(x, self.p)

    def sqrt(self, x) -> int:
        return sqrt_mod_p(x, self.p)

    def elements(self):
        return range(self.p)

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("GF", self.p))

    def __repr__(self):
        return f"GF({self.p})"


class Fp2:
    """Element a + b*u of F_p[u]/(u^2 - n)."""

    __slots__ = ("a", "b", "F")

    def __init__(self, a: int, b: int, F: "Fp2Field"):
        p = F.p
        self.a, self.b, self.F = a % p, b % p, F

    def _lift(self, other) -> "Fp2":
        if isinstance(other, Fp2):
            return other
        return Fp2(int(other), 0, self.F)

    def __add__(self, other):
        o = self._lift(other)
        return Fp2(self.a + o.a, self.b + o.b, self.F)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._lift(other)
        return Fp2(self.a - o.a, self.b - o.b, self.F)

    def __rsub__(self, other):
        return self._lift(other) - self

    def __neg__(self):
        return Fp2(-self.a, -self.b, self.F)

    def __mul__(self, other):
        o = self._lift(other)
        return Fp2(self.a * o.a + self.F.n * self.b * o.b, self.a * o.b + self.b * o.a, self.F)

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, Fp2):
            return self.a == other.a and self.b == other.b
        return self.b == 0 and self.a == int(other) % self.F.p

    def __hash__(self):
        return hash((self.a, self.b))

    def __bool__(self):
        return bool(self.a or self.b)

    def __repr__(self):
        return f"({self.a}+{self.b}u)"

    def norm(self) -> int:
        return (self.a * self.a - self.F.n * self.b * self.b) % self.F.p

    def conj(self) -> "Fp2":
        return Fp2(self.a, -self.b, self.F)

    def inverse(self) -> "Fp2":
        ni = pow(self.norm(), -1, self.F.p)
        return Fp2(self.a * ni, -self.b * ni, self.F)

    def __truediv__(self, other):
        return self * self._lift(other).inverse()

    def __pow__(self, e: int):
        result, base = Fp2(1, 0, self.F), self
        if e < 0:
            base, e = base.inverse(), -e
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def in_base_field(self) -> bool:
        return self.b == 0


class Fp2Field:
    """F_{p^2} realised as F_p[u]/(u^2 - n), n the least non-residue."""

    def __init__(self, p: int):
        self.p = p
        self.char = p
        self.n = least_nonresidue(p)
        self.zero = Fp2(0, 0, self)
        self.one = Fp2(1, 0, self)
        self.u = Fp2(0, 1, self)

    def __call__(self, x, y: int = 0) -> Fp2:
        if isinstance(x, Fp2):
            return x
        return Fp2(int(x), y, self)

    def red(self, x):
        return x

    def inv(self, x: Fp2) -> Fp2:
        return x.inverse()

    def is_square(self, x: Fp2) -> bool:
        # Squares of F_{p^2}^* are exactly the elements of square norm.
        return (not x) or is_square_mod_p(x.norm(), self.p)

    def sqrt(self, x: Fp2) -> Fp2:
        x = self(x)
        if not x:
            return self.zero
        p = self.p
        if x.b == 0:
            if is_square_mod_p(x.a, p):
                return Fp2(sqrt_mod_p(x.a, p), 0, self)
            return Fp2(0, sqrt_mod_p(x.a * pow(self.n, -1, p), p), self)
        if not self.is_square(x):
            raise ValueError(f"{x} is not a square in F_{p}^2")
        # Tonelli-Shanks in the cyclic group of order p^2 - 1.
        q, s = p * p - 1, 0
        while q % 2 == 0:
            q //= 2
            s += 1
        z = self.u + 1
        while self.is_square(z):
            z = z + 1
        m, c, t, r = s, z ** q, x ** q, x ** ((q + 1) // 2)
        while t != 1:
            i, t2 = 0, t
            while t2 != 1:
                t2 = t2 * t2
                i += 1
            b = c ** (1 << (m - i - 1))
            m, c = i, b * b
            t, r = t * c, r * b
        return r

    def elements(self):
        for a in range(self.p):
            for b in range(self.p):
                yield Fp2(a, b, self)

    def __eq__(self, other):
        return isinstance(other, Fp2Field) and other.p == self.p

    def __hash__(self):
        return hash(("GF2", self.p))

    def __repr__(self):
        return f"GF({self.p}^2)"


# --- polynomial arithmetic over a field --------------------------------------


def ftrim(F, c: Sequence) -> tuple:
    c = [F.red(x) for x in c]
    n = len(c)
    while n and not c[n - 1]:
        n -= 1
    return tuple(c[:n])


def fadd(F, f, g):
    if len(f) < len(g):
        f, g = g, f
    out = list(f)
    for i, c in enumerate(g):
        out[i] = out[i] + c
    return ftrim(F, out)


def fneg(F, f):
    return ftrim(F, [-c for c in f])


def fsub(F, f, g):
    if len(f) < len(g):
        out = list(f) + [F.zero] * (len(g) - len(f))
    else:
        out = list(f)
    for i, c in enumerate(g):
        out[i] = out[i] - c
    return ftrim(F, out)


def fscale(F, f, c):
    return ftrim(F, [c * x for x in f])


def fmul(F, f, g):
    if not f or not g:
        return ()
    out = [F.zero] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                out[i + j] = out[i + j] + a * b
    return ftrim(F, out)


def fdivmod(F, f, g):
    if not g:
        raise ZeroDivisionError("polynomial division by zero")
    dg = len(g) - 1
    if len(f) - 1 < dg:
        return (), tuple(f)
    r = list(f)
    q = [F.zero] * (len(f) - dg)
    inv = F.inv(g[-1])
    for i in range(len(r) - 1, dg - 1, -1):
        c = F.red(r[i] * inv)
        if c:
            q[i - dg] = c
            for j in range(dg + 1):
                r[i - dg + j] = r[i - dg + j] - c * g[j]
    return ftrim(F, q), ftrim(F, r[:dg])


def fmod(F, f, g):
    return fdivmod(F, f, g)[1]


def fmonic(F, f):
    if not f:
        return f
    inv = F.inv(f[-1])
    return ftrim(F, [c * inv for c in f])


def fxgcd(F, f, g):
    """Return (d, s, t) with d = s f + t g monic (or d = () if f = g = 0)."""
    r0, r1 = tuple(f), tuple(g)
    s0, s1 = (F.one,), ()
    t0, t1 = (), (F.one,)
    while r1:
        q, r = fdivmod(F, r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, fsub(F, s0, fmul(F, q, s1))
        t0, t1 = t1, fsub(F, t0, fmul(F, q, t1))
    if not r0:
        return (), (), ()
    inv = F.inv(r0[-1])
    return fscale(F, r0, inv), fscale(F, s0, inv), fscale(F, t0, inv)


def feval(F, f, x):
    acc = F.zero
    for c in reversed(f):
        acc = acc * x + c
    return F.red(acc)


def fderiv(F, f):
    return ftrim(F, [i * f[i] for i in range(1, len(f))])


def fgcd(F, f, g):
    return fxgcd(F, f, g)[0]


def fconvert(F, f):
    """Map an integer/rational polynomial into F[x]."""
    return ftrim(F, [F(c) for c in f])


def froots(F, f):
    """Roots in a prime field by exhaustive search (small p only)."""
    return [x for x in F.elements() if not feval(F, f, x)]
