"""Genus-2 Jacobian arithmetic in Mumford representation.

Classes are stored as ``MumfordPoint(a, b, tag)``. For a quintic model the
class is ``D_a - deg(a) * inf``. For a sextic model it is

    D_a + n+ inf+ + n- inf- - (inf+ + inf-),   n+ + n- = 2 - deg a,

with ``tag = n+ - n-`` (so tag is 0 when deg a = 2, +-1 when deg a = 1 and
one of -2, 0, 2 when a = 1). When the points at infinity are not defined
over the base field only tag 0 occurs. Every class has exactly one such
representative, which makes the tuples usable as dictionary keys.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple

from .arith.fields import (
    QQ,
    PrimeField,
    fadd,
    fconvert,
    fdivmod,
    feval,
    fderiv,
    fmod,
    fmonic,
    fmul,
    fneg,
    fscale,
    fsub,
    ftrim,
    fxgcd,
)
from .arith import fpoly as fp
from .arith.padic import PadicNumber
from .curve import BadReduction, HyperCurve, Point, canonical_sqrt_lc, iota

CHECK_INVARIANTS = True


class MumfordPoint(NamedTuple):
    a: tuple
    b: tuple
    tag: int = 0

    def to_json(self) -> dict:
        return {"a": [_fmt(c) for c in self.a], "b": [_fmt(c) for c in self.b], "inf_tag": self.tag}

    @classmethod
    def from_json(cls, data) -> "MumfordPoint":
        a = tuple(Fraction(c) for c in data["a"])
        b = tuple(Fraction(c) for c in data.get("b", []))
        return cls(a, b, int(data.get("inf_tag", 0)))


def _fmt(c) -> str:
    c = Fraction(c)
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


class JacobianError(ValueError):
    pass


class Jacobian:
    """The Jacobian of y^2 = f(x) over a field ``F`` (QQ or a prime field)."""

    def __init__(self, f, F):
        self.F = F
        self.f = fconvert(F, f)
        self.deg = len(self.f) - 1
        if self.deg not in (5, 6):
            raise JacobianError(f"model of degree {self.deg} is not genus 2")
        one = F.one
        self.identity = MumfordPoint((one,), (), 0)
        self.split = False
        self.s = None
        if self.deg == 6 and F.is_square(self.f[-1]):
            self.split = True
            self.s = F.sqrt(self.f[-1])
            half = F.inv(F(2))
            g = fscale(F, self.f, F.inv(self.f[-1]))
            g5, g4, g3 = g[5], g[4], g[3]
            q2 = F.red(g5 * half)
            q1 = F.red((g4 - q2 * q2) * half)
            q0 = F.red((g3 - 2 * q1 * q2) * half)
            self.vplus = fscale(F, (q0, q1, q2, one), self.s)
            r = fsub(F, self.f, fmul(F, self.vplus, self.vplus))
            assert len(r) <= 3
            self.deg_r = len(r) - 1

    def __eq__(self, other):
        return isinstance(other, Jacobian) and self.F == other.F and self.f == other.f

    def __hash__(self):
        return hash((self.F, self.f))

    def __repr__(self):
        return f"Jacobian(f={list(self.f)}, F={self.F!r})"

    # -- validity ----------------------------------------------------------------

    def check(self, D: MumfordPoint) -> None:
        F = self.F
        a, b, tag = D
        if not a or a[-1] != F.one:
            raise JacobianError(f"a is not monic: {a}")
        k = len(a) - 1
        if k > 2 or len(b) > k:
            raise JacobianError(f"degree conditions violated: {D}")
        rem = fmod(F, fsub(F, fmul(F, b, b), self.f), a)
        if rem:
            raise JacobianError(f"a does not divide b^2 - f: {D}")
        if self.deg == 5 or not self.split:
            if tag != 0:
                raise JacobianError(f"nonzero tag on a model without rational infinity: {D}")
        elif (2 - k + tag) % 2 or abs(tag) > 2 - k:
            raise JacobianError(f"tag {tag} impossible for deg a = {k}")

    def is_valid(self, D) -> bool:
        try:
            self.check(D)
        except JacobianError:
            return False
        return True

    # -- group law ---------------------------------------------------------------

    def neg(self, D: MumfordPoint) -> MumfordPoint:
        return MumfordPoint(D.a, fneg(self.F, D.b), -D.tag)

    def _counts(self, D):
        k = len(D.a) - 1
        return (2 - k + D.tag) // 2, (2 - k - D.tag) // 2

    def add(self, D1: MumfordPoint, D2: MumfordPoint) -> MumfordPoint:
        F = self.F
        one = (F.one,)
        if D1.a == one and D1.tag == 0:
            return D2
        if D2.a == one and D2.tag == 0:
            return D1
        u1, v1 = D1.a, D1.b
        u2, v2 = D2.a, D2.b
        d1, e1, e2 = fxgcd(F, u1, u2)
        if len(d1) == 1:
            d = one
            u = fmul(F, u1, u2)
            v = fmod(F, fadd(F, fmul(F, fmul(F, e1, u1), v2), fmul(F, fmul(F, e2, u2), v1)), u)
        else:
            d, c1, c2 = fxgcd(F, d1, fadd(F, v1, v2))
            s1, s2 = fmul(F, c1, e1), fmul(F, c1, e2)
            u = fdivmod(F, fmul(F, u1, u2), fmul(F, d, d))[0]
            num = fadd(F, fmul(F, fmul(F, s1, u1), v2), fmul(F, fmul(F, s2, u2), v1))
            num = fadd(F, num, fmul(F, c2, fadd(F, fmul(F, v1, v2), self.f)))
            v = fmod(F, fdivmod(F, num, d)[0], u)
        if self.deg == 5:
            out = self._reduce5(u, v)
        else:
            n1p, n1m = self._counts(D1)
            n2p, n2m = self._counts(D2)
            dd = len(d) - 1
            out = self._reduce6(u, v, n1p + n2p + dd - 1, n1m + n2m + dd - 1)
        if CHECK_INVARIANTS:
            self.check(out)
        return out

    def _reduce5(self, u, v):
        F = self.F
        while len(u) > 3:
            u = fmonic(F, fdivmod(F, fsub(F, self.f, fmul(F, v, v)), u)[0])
            v = fmod(F, fneg(F, v), u)
        return MumfordPoint(u, v, 0)

    def _pole_orders(self, w):
        """Pole orders of y - w at inf+ and inf- (negative for zeros)."""
        F = self.F
        if not self.split:
            return 3, 3
        dm = fsub(F, w, self.vplus)
        dp = fadd(F, w, self.vplus)
        deltap = len(dm) - 1 if dm else -(3 - self.deg_r)
        deltam = len(dp) - 1 if dp else -(3 - self.deg_r)
        return deltap, deltam

    def _reduce6(self, u, v, a, b):
        F = self.F
        if a >= 0 and b >= 0:
            return MumfordPoint(u, v, a - b)
        k = len(u) - 1
        if self.split:
            if a < 0:
                w = fsub(F, fmod(F, fadd(F, v, self.vplus), u), self.vplus)
            else:
                w = fadd(F, fmod(F, fsub(F, v, self.vplus), u), self.vplus)
        else:
            w = v
        q, rem = fdivmod(F, fsub(F, fmul(F, w, w), self.f), u)
        assert not rem
        u2 = fmonic(F, q)
        v2 = fmod(F, fneg(F, w), u2)
        dp, dm = self._pole_orders(w)
        a2, b2 = a + k - dm, b + k - dp
        assert a2 >= 0 and b2 >= 0 and a2 + b2 + len(u2) - 1 == 2, (a, b, k, a2, b2, u2)
        return MumfordPoint(u2, v2, a2 - b2)

    def double(self, D):
        return self.add(D, D)

    def sub(self, D1, D2):
        return self.add(D1, self.neg(D2))

    def scalar_mul(self, n: int, D: MumfordPoint) -> MumfordPoint:
        if n < 0:
            return self.neg(self.scalar_mul(-n, D))
        result, base = self.identity, D
        while n:
            if n & 1:
                result = self.add(result, base)
            n >>= 1
            if n:
                base = self.add(base, base)
        return result

    def order_dividing(self, D, n: int, factors: dict) -> int:
        """Order of D given that n * D = 0 and n = prod p^e over ``factors``."""
        m = n
        for p in factors:
            while m % p == 0 and self.scalar_mul(m // p, D) == self.identity:
                m //= p
        return m

    # -- building classes from points ---------------------------------------------

    def from_effective(self, points, n_plus: int = 0, n_minus: int = 0) -> MumfordPoint:
        """Class of E - (inf+ + inf-) (sextic) or E - deg(E) inf (quintic) for
        the effective divisor E = points + n_plus inf+ + n_minus inf-."""
        F = self.F
        aff = []
        for pt in points:
            if pt.inf == "inf+":
                n_plus += 1
            elif pt.inf == "inf-":
                n_minus += 1
            elif pt.inf:
                if self.deg == 6:
                    raise JacobianError("single point at infinity on a sextic model")
            else:
                aff.append((F.red(F(pt.x) if not isinstance(pt.x, int) else pt.x), F.red(F(pt.y) if not isinstance(pt.y, int) else pt.y)))
        # P + iota(P) is linearly equivalent to the divisor at infinity
        kept = []
        for x, y in aff:
            for i, (x2, y2) in enumerate(kept):
                if x2 == x and F.red(y2 + y) == F.zero:
                    kept.pop(i)
                    n_plus += 1
                    n_minus += 1
                    break
            else:
                kept.append((x, y))
        if len(kept) > 2:
            raise JacobianError("only effective divisors of degree <= 2 are supported")
        if not kept:
            u, v = (F.one,), ()
        elif len(kept) == 1:
            (x1, y1), = kept
            u, v = (F.red(-x1), F.one), ftrim(F, (y1,))
        else:
            (x1, y1), (x2, y2) = kept
            if x1 != x2:
                slope = F.red((y2 - y1) * F.inv(F.red(x2 - x1)))
            else:
                slope = F.red(feval(F, fderiv(F, self.f), x1) * F.inv(F.red(2 * y1)))
            u = ftrim(F, (x1 * x2, -(x1 + x2), F.one))
            v = ftrim(F, (y1 - slope * x1, slope))
            v = fmod(F, v, u)
        if self.deg == 5:
            D = MumfordPoint(u, v, 0)
        else:
            k = len(u) - 1
            if k + n_plus + n_minus != 2:
                D = self._from_larger(u, v, n_plus, n_minus)
            else:
                if not self.split and n_plus != n_minus:
                    raise JacobianError("points at infinity are not rational here")
                D = MumfordPoint(u, v, n_plus - n_minus if self.split else 0)
        if CHECK_INVARIANTS:
            self.check(D)
        return D

    def _from_larger(self, u, v, n_plus, n_minus):
        """Effective divisors of degree > 2 (or < 2) relative to inf+ + inf-."""
        k = len(u) - 1
        extra = k + n_plus + n_minus - 2
        if extra % 2:
            raise JacobianError("odd degree divisor on a sextic model")
        # subtract (extra / 2) copies of the divisor at infinity
        a, b = n_plus - extra // 2, n_minus - extra // 2
        return self._reduce6(u, v, a, b) if a < 0 or b < 0 else MumfordPoint(u, v, a - b)

    def infinity_difference(self) -> MumfordPoint:
        """[inf+ - inf-]."""
        if not self.split:
            raise JacobianError("points at infinity are not rational")
        return MumfordPoint((self.F.one,), (), 2)


class JacobianFp(Jacobian):
    """Jacobian over a prime field with the group law on plain int tuples."""

    def __init__(self, f, p: int):
        super().__init__(f, PrimeField(p))
        self.p = p

    def neg(self, D):
        p = self.p
        return MumfordPoint(D.a, tuple((-x) % p for x in D.b), -D.tag)

    def add(self, D1, D2):
        p = self.p
        if D1.a == (1,) and D1.tag == 0:
            return D2
        if D2.a == (1,) and D2.tag == 0:
            return D1
        u1, v1 = D1.a, D1.b
        u2, v2 = D2.a, D2.b
        uv = self._compose22(u1, v1, u2, v2) if len(u1) == 3 and len(u2) == 3 else None
        if uv is not None:
            dd = 0
            u, v = uv
        elif len((d1e1 := fp.inverse_mod(u1, u2, p))[0]) == 1:
            e1 = d1e1[1]
            # coprime supports: v = v1 + u1 * ((v2 - v1) / u1 mod u2)
            dd = 0
            u = fp.mul(u1, u2, p)
            t = fp.mod(fp.mul(fp.sub(v2, v1, p), e1, p), u2, p)
            v = fp.add(v1, fp.mul(u1, t, p), p)
        else:
            d1, e1, e2 = fp.xgcd(u1, u2, p)
            d, c1, c2 = fp.xgcd(d1, fp.add(v1, v2, p), p)
            dd = len(d) - 1
            s1, s2 = fp.mul(c1, e1, p), fp.mul(c1, e2, p)
            u = fp.divmod_(fp.mul(u1, u2, p), fp.mul(d, d, p), p)[0]
            num = fp.add(fp.mul(fp.mul(s1, u1, p), v2, p), fp.mul(fp.mul(s2, u2, p), v1, p), p)
            num = fp.add(num, fp.mul(c2, fp.add(fp.mul(v1, v2, p), self.f, p), p), p)
            v = fp.mod(fp.divmod_(num, d, p)[0], u, p)
        if self.deg == 5:
            while len(u) > 3:
                u = fp.monic(fp.divmod_(fp.sub(self.f, fp.mul(v, v, p), p), u, p)[0], p)
                v = fp.mod(fp.neg(v, p), u, p)
            out = MumfordPoint(u, v, 0)
        else:
            k1, k2 = len(u1) - 1, len(u2) - 1
            a = (2 - k1 + D1.tag) // 2 + (2 - k2 + D2.tag) // 2 + dd - 1
            b = (2 - k1 - D1.tag) // 2 + (2 - k2 - D2.tag) // 2 + dd - 1
            out = self._reduce6(u, v, a, b)
        if CHECK_INVARIANTS:
            if fp.mod(fp.sub(fp.mul(out.b, out.b, p), self.f, p), out.a, p):
                raise JacobianError(f"a does not divide b^2 - f: {out}")
        return out

    def _compose22(self, u1, v1, u2, v2):
        """Composition of two degree-2 classes with coprime a-polynomials,
        written out; None when the a-polynomials share a root."""
        p = self.p
        a0, a1 = u1[0], u1[1]
        b0, b1 = u2[0], u2[1]
        r0, r1 = a0 - b0, a1 - b1
        res = (r0 * r0 - r0 * r1 * b1 + r1 * r1 * b0) % p
        if not res:
            return None
        ri = pow(res, -1, p)
        i1 = -r1 * ri % p
        i0 = (r0 - r1 * b1) * ri % p
        c0 = v1[0] if v1 else 0
        c1 = v1[1] if len(v1) > 1 else 0
        e0 = (v2[0] if v2 else 0) - c0
        e1 = (v2[1] if len(v2) > 1 else 0) - c1
        t1 = (e1 * i0 + e0 * i1 - e1 * i1 * b1) % p
        t0 = (e0 * i0 - e1 * i1 * b0) % p
        u = ((a0 * b0) % p, (a1 * b0 + a0 * b1) % p, (a0 + b0 + a1 * b1) % p, (a1 + b1) % p, 1)
        v = fp.trim(((c0 + a0 * t0) % p, (c1 + a1 * t0 + a0 * t1) % p, (t0 + a1 * t1) % p, t1))
        return u, v

    def _reduce6(self, u, v, a, b):
        p = self.p
        if a >= 0 and b >= 0:
            return MumfordPoint(u, v, a - b)
        k = len(u) - 1
        if self.split:
            vp = self.vplus
            if a < 0:
                w = fp.sub(fp.mod(fp.add(v, vp, p), u, p), vp, p)
            else:
                w = fp.add(fp.mod(fp.sub(v, vp, p), u, p), vp, p)
            dm_ = fp.sub(w, vp, p)
            dp_ = fp.add(w, vp, p)
            deltap = len(dm_) - 1 if dm_ else -(3 - self.deg_r)
            deltam = len(dp_) - 1 if dp_ else -(3 - self.deg_r)
        else:
            w = v
            deltap = deltam = 3
        q, rem = fp.divmod_(fp.sub(fp.mul(w, w, p), self.f, p), u, p)
        u2 = fp.monic(q, p)
        v2 = fp.mod(fp.neg(w, p), u2, p)
        a2, b2 = a + k - deltam, b + k - deltap
        assert not rem and a2 >= 0 and b2 >= 0 and a2 + b2 + len(u2) == 3
        return MumfordPoint(u2, v2, a2 - b2)


# --- Jacobians attached to curves ---------------------------------------------------


@lru_cache(maxsize=None)
def jacobian_q(f: tuple) -> Jacobian:
    return Jacobian(f, QQ)


@lru_cache(maxsize=None)
def jacobian_fp(f: tuple, p: int) -> JacobianFp:
    return JacobianFp(tuple(c % p for c in f), p)


def cantor_add(D1, D2, J: Jacobian) -> MumfordPoint:
    return J.add(D1, D2)


def scalar_mul(n: int, D, J: Jacobian) -> MumfordPoint:
    return J.scalar_mul(n, D)


def _v(x: Fraction, p: int) -> int:
    x = Fraction(x)
    if x == 0:
        return math.inf
    n, d, v = x.numerator, x.denominator, 0
    while n % p == 0:
        n //= p
        v += 1
    while d % p == 0:
        d //= p
        v -= 1
    return v


def _integral(poly, p: int) -> bool:
    return all(Fraction(c).denominator % p for c in poly)


def _red(c, p: int) -> int:
    c = Fraction(c)
    return c.numerator * pow(c.denominator, -1, p) % p


def _inf_point(y_over_x3, Jp: Jacobian, p: int) -> Point:
    """Reduction of a point near infinity from the value of y / x^3 there."""
    if Jp.deg == 5:
        return Point(inf="inf")
    val = y_over_x3 % p
    if val == Jp.s:
        return Point(inf="inf+")
    if val == (-Jp.s) % p:
        return Point(inf="inf-")
    raise BadReduction("point near infinity does not reduce onto the curve")


def reduce_mod_p(D: MumfordPoint, curve: HyperCurve, p: int) -> MumfordPoint:
    """Image of a class of J(Q) in J(F_p) for a prime p of good reduction."""
    if not curve.is_good_reduction(p):
        raise BadReduction(f"p = {p} is not a prime of good reduction")
    Jq = jacobian_q(curve.f)
    Jp = jacobian_fp(curve.f, p)
    u, v, tag = D
    k = len(u) - 1
    if Jq.deg == 6:
        n_plus, n_minus = (2 - k + tag) // 2, (2 - k - tag) // 2
    else:
        n_plus = n_minus = 0
    if Jq.split and Jp.split and _red(Jq.s, p) != Jp.s:
        n_plus, n_minus = n_minus, n_plus
    if Jp.deg == 5:
        n_plus = n_minus = 0
    F = Jp.F
    if _integral(u, p):
        if not _integral(v, p):
            # the two points reduce to P and iota(P)
            return Jp.from_effective([], n_plus + 1, n_minus + 1) if Jp.deg == 6 else Jp.identity
        ub = tuple(_red(c, p) for c in u)
        vb = ftrim(F, [_red(c, p) for c in v])
        if Jp.deg == 5:
            out = MumfordPoint(ub, vb, 0)
        elif Jp.split:
            out = MumfordPoint(ub, vb, n_plus - n_minus)
        else:
            assert n_plus == n_minus
            out = MumfordPoint(ub, vb, 0)
        Jp.check(out)
        return out
    if k == 1:
        x1, y1 = -Fraction(u[0]), Fraction(v[0]) if v else Fraction(0)
        pt = _inf_point(_red(y1 / x1**3, p), Jp, p)
        return Jp.from_effective([pt], n_plus, n_minus)
    u0, u1 = Fraction(u[0]), Fraction(u[1])
    v0 = Fraction(v[0]) if v else Fraction(0)
    v1 = Fraction(v[1]) if len(v) > 1 else Fraction(0)
    if _v(u0, p) < min(_v(u1, p), 0):
        # both roots are non-integral: flip x -> 1/x where both sit near 0
        w1, w0 = u1 / u0, 1 / u0
        # y' = y / x^3 = v1 x'^2 + v0 x'^3 reduced modulo x'^2 + w1 x' + w0
        c1 = -v1 * w1 + v0 * (w1 * w1 - w0)
        c0 = -v1 * w0 + v0 * w1 * w0
        if Jp.deg == 5 or not _integral((c0, c1), p):
            return Jp.from_effective([], n_plus + 1, n_minus + 1) if Jp.deg == 6 else Jp.identity
        pt = _inf_point(_red(c0, p), Jp, p)
        return Jp.from_effective([pt, pt], n_plus, n_minus)
    # one integral root and one root near infinity, both in Q_p
    vb = -_v(u1, p)
    prec = 12 + 3 * (abs(_v(u0, p)) + abs(vb)) + abs(min(_v(v0, p), 0)) + abs(min(_v(v1, p), 0))
    P = lambda x: PadicNumber.from_rational(x, p, prec)
    pu0, pu1, pv0, pv1 = P(u0), P(u1), P(v0), P(v1)
    xs = P(0)
    for _ in range(prec + 2):
        xs = -(pu0 / (pu1 + xs))
    xb = -(pu1) - xs
    ys = pv1 * xs + pv0
    xi = 1 / xb
    yb = pv1 * xi * xi + pv0 * xi * xi * xi
    small = Point(xs.residue(), ys.residue())
    big = _inf_point(yb.residue(), Jp, p)
    return Jp.from_effective([small, big], n_plus, n_minus)


def embed_point(Q: Point, J: Jacobian, base: Point) -> MumfordPoint:
    """[Q - base]."""
    return J.from_effective([Q, iota(base)])


def difference_embed(Q: Point, J: Jacobian) -> MumfordPoint:
    """[Q - iota(Q)]."""
    return J.from_effective([Q, Q])


def default_base_point(curve: HyperCurve, points) -> Point | None:
    """inf for quintic models, otherwise the first point in canonical order."""
    if curve.degree % 2:
        return Point(inf="inf")
    return points[0] if points else None


def mumford_is_on_jacobian(D: MumfordPoint, curve: HyperCurve) -> bool:
    return jacobian_q(curve.f).is_valid(D)
