"""Hyperelliptic curves y^2 = f(x), their reductions and their points over
finite fields and over Q."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from .arith.factor import is_square_mod_p, sqrt_mod_p
from .arith.fields import Fp2Field, PrimeField
from .arith.poly import binary_form_discriminant, deg, evaluate, is_squarefree, reverse, trim


class BadReduction(ValueError):
    pass


class HyperCurve:
    """y^2 = f(x) with f an integer squarefree polynomial of degree 2g+1 or 2g+2."""

    def __init__(self, f):
        f = trim([int(c) for c in f])
        if len(f) < 6:
            raise ValueError("need degree >= 5 (genus >= 2)")
        if not is_squarefree(f):
            raise ValueError("f is not squarefree")
        self.f = f
        self.genus = (deg(f) - 1) // 2

    @property
    def degree(self) -> int:
        return deg(self.f)

    @property
    def lc(self) -> int:
        return self.f[-1]

    @property
    def form_degree(self) -> int:
        return 2 * self.genus + 2

    def __eq__(self, other):
        return isinstance(other, HyperCurve) and self.f == other.f

    def __hash__(self):
        return hash(self.f)

    def __repr__(self):
        return f"HyperCurve({list(self.f)})"

    def homogenize(self) -> tuple:
        """Coefficients c_i of X^i Z^(2g+2-i) in F(X, Z), i = 0..2g+2."""
        return tuple(self.f) + (0,) * (self.form_degree + 1 - len(self.f))

    def chart_at_infinity(self) -> tuple:
        """F(1, z) as a polynomial in z."""
        return reverse(self.f, self.form_degree)

    @cached_property
    def discriminant(self) -> int:
        return binary_form_discriminant(self.f, self.form_degree)

    def is_good_reduction(self, p: int) -> bool:
        return p != 2 and self.discriminant % p != 0

    def contains(self, pt: "Point") -> bool:
        if pt.inf:
            if self.degree % 2:
                return pt.inf == "inf"
            s = math.isqrt(self.lc) if self.lc > 0 else -1
            return pt.inf in ("inf+", "inf-") and s * s == self.lc
        return pt.y * pt.y == evaluate(self.f, pt.x)

    def to_json(self) -> dict:
        return {"f": list(self.f)}

    @classmethod
    def from_json(cls, data) -> "HyperCurve":
        if isinstance(data, str):
            data = json.loads(data)
        return cls(data["f"])


@dataclass(frozen=True, order=True)
class Point:
    """A point with coordinates in some field, or a point at infinity.

    ``inf`` is "" for affine points, "inf+"/"inf-" for the two points at
    infinity of an even degree model (sign of y/x^(g+1) relative to the chosen
    square root of the leading coefficient), "inf" for odd degree.
    """

    x: object = None
    y: object = None
    inf: str = ""

    def __str__(self):
        return self.inf if self.inf else f"({self.x}, {self.y})"

    def to_json(self):
        if self.inf:
            return self.inf
        return {"x": str(self.x), "y": str(self.y)}

    @classmethod
    def from_json(cls, data) -> "Point":
        if isinstance(data, str):
            return cls(inf=data)
        return cls(Fraction(data["x"]), Fraction(data["y"]))


def iota(pt: Point) -> Point:
    if pt.inf == "inf+":
        return Point(inf="inf-")
    if pt.inf == "inf-":
        return Point(inf="inf+")
    if pt.inf:
        return pt
    return Point(pt.x, -pt.y)


def reduce_curve(curve: HyperCurve, p: int) -> tuple:
    return trim([c % p for c in curve.f])


def infinity_points(curve: HyperCurve, F) -> list[Point]:
    fbar = trim([F(c) for c in curve.f])
    n = curve.form_degree
    if len(fbar) - 1 == n:
        if F.is_square(fbar[-1]):
            return [Point(inf="inf+"), Point(inf="inf-")]
        return []
    if len(fbar) - 1 == n - 1:
        return [Point(inf="inf")]
    raise BadReduction("reduction drops degree by more than one")


def enumerate_points(curve: HyperCurve, p: int, ext: int = 1) -> list[Point]:
    """All points of the reduction over F_p (ext=1) or F_{p^2} (ext=2)."""
    if not curve.is_good_reduction(p):
        raise BadReduction(f"p = {p} is not a prime of good reduction")
    F = PrimeField(p) if ext == 1 else Fp2Field(p)
    fbar = [F(c) for c in curve.f]
    out = []
    for x in F.elements():
        v = F.zero
        for c in reversed(fbar):
            v = v * x + c
        v = F.red(v)
        if not v:
            out.append(Point(x, F.zero))
        elif F.is_square(v):
            r = F.sqrt(v)
            out += [Point(x, r), Point(x, F.red(-r))]
    return out + infinity_points(curve, F)


def count_points(curve: HyperCurve, p: int, ext: int = 1) -> int:
    """#C(F_{p^ext}) without materialising the points."""
    if not curve.is_good_reduction(p):
        raise BadReduction(f"p = {p} is not a prime of good reduction")
    xs = np.arange(p, dtype=np.int64)
    if ext == 1:
        v = np.zeros(p, dtype=np.int64)
        for c in reversed(curve.f):
            v = (v * xs + c) % p
        chi = _legendre_table(p)
        n_aff = int(np.sum(1 + chi[v]))
        fbar = reduce_curve(curve, p)
        if len(fbar) - 1 == curve.form_degree:
            n_inf = 1 + int(chi[fbar[-1]])
        else:
            n_inf = 1
        return n_aff + n_inf
    # x = a + b u in F_{p^2}; f(x) = A + B u, and the value is a square iff its
    # norm A^2 - n B^2 is a square in F_p.
    F = Fp2Field(p)
    n = F.n
    a = np.repeat(xs, p)
    b = np.tile(xs, p)
    A = np.zeros(p * p, dtype=np.int64)
    B = np.zeros(p * p, dtype=np.int64)
    for c in reversed(curve.f):
        A, B = (A * a + n * B % p * b + c) % p, (A * b + B * a) % p
    norm = (A * A - n * (B * B % p)) % p
    chi = _legendre_table(p)
    zero = (A == 0) & (B == 0)
    n_aff = int(np.sum(np.where(zero, 1, 1 + chi[norm])))
    fbar = reduce_curve(curve, p)
    n_inf = 2 if len(fbar) - 1 == curve.form_degree else 1
    return n_aff + n_inf


_CHI_CACHE: dict[int, np.ndarray] = {}


def _legendre_table(p: int) -> np.ndarray:
    t = _CHI_CACHE.get(p)
    if t is None:
        t = -np.ones(p, dtype=np.int64)
        t[0] = 0
        t[(np.arange(1, p, dtype=np.int64) ** 2) % p] = 1
        _CHI_CACHE[p] = t
    return t


def canonical_sqrt_lc(curve: HyperCurve, p: int):
    """The square root of the leading coefficient that defines inf+ over F_p,
    or None when the points at infinity are not F_p-rational."""
    lc = curve.lc % p
    if lc == 0 or not is_square_mod_p(lc, p):
        return None
    return sqrt_mod_p(lc, p)


# --- rational points ------------------------------------------------------------

_FILTER_MODULI = (64, 63, 65, 11, 17, 19, 23, 29, 31, 37, 41, 43, 47)


def _square_tables():
    out = []
    for m in _FILTER_MODULI:
        t = np.zeros(m, dtype=bool)
        t[(np.arange(m) ** 2) % m] = True
        out.append((m, t))
    return out


_SQ_TABLES = _square_tables()


def rational_infinity_points(curve: HyperCurve) -> list[Point]:
    if curve.degree % 2:
        return [Point(inf="inf")]
    lc = curve.lc
    if lc > 0 and math.isqrt(lc) ** 2 == lc:
        return [Point(inf="inf+"), Point(inf="inf-")]
    return []


def search_rational_points(curve: HyperCurve, height: int) -> list[Point]:
    """Points with x = m/n, gcd(m, n) = 1, |m|, |n| <= height, plus the
    rational points at infinity.

    Candidates are screened by quadratic residuosity of F(m, n) modulo a few
    small moduli before the exact square test.
    """
    n_form = curve.form_degree
    coeffs = curve.homogenize()
    ms = np.arange(-height, height + 1, dtype=np.int64)
    found = []
    for n in range(1, height + 1):
        keep = np.gcd(ms, n) == 1
        for mod, table in _SQ_TABLES:
            acc = np.zeros(ms.shape, dtype=np.int64)
            npow = [pow(n, k, mod) for k in range(n_form + 1)]
            for i in range(n_form, -1, -1):
                acc = (acc * (ms % mod) + coeffs[i] % mod * npow[n_form - i]) % mod
            keep &= table[acc]
        for m in ms[keep].tolist():
            val = sum(c * m**i * n ** (n_form - i) for i, c in enumerate(coeffs))
            if val < 0:
                continue
            r = math.isqrt(val)
            if r * r != val:
                continue
            x = Fraction(m, n)
            y = Fraction(r, n ** (n_form // 2))
            found.append(Point(x, y))
            if y:
                found.append(Point(x, -y))
    return sort_points(found + rational_infinity_points(curve))


def point_height(pt: Point) -> int:
    if pt.inf:
        return 0
    return max(abs(pt.x.numerator), pt.x.denominator)


def sort_points(points) -> list[Point]:
    """Canonical order: infinity first, then by height, x, and sign of y."""

    def key(pt):
        if pt.inf:
            return (0, 0, Fraction(0), 0, pt.inf)
        return (1, point_height(pt), pt.x, 0 if pt.y >= 0 else 1, "")

    return sorted(set(points), key=key)
