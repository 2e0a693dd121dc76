"""Truncated p-adic numbers with tracked absolute precision, their unramified
quadratic extension, and formal power series over either.

A :class:`PadicNumber` stores ``unit * p**val`` known modulo ``p**prec``. A
value that is zero to the working precision has ``unit == 0`` and
``val == prec``; the exact zero is a separate object with ``val is None``.
"""

from __future__ import annotations

from fractions import Fraction

from .factor import is_square_mod_p, least_nonresidue, sqrt_mod_p

DEFAULT_PRECISION = 6


class PrecisionError(ArithmeticError):
    pass


def _vp(n: int, p: int) -> int:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


class PadicNumber:
    __slots__ = ("p", "val", "unit", "prec")

    def __init__(self, p: int, val, unit: int, prec):
        self.p, self.val, self.unit, self.prec = p, val, unit, prec

    # -- construction ---------------------------------------------------------

    @classmethod
    def exact_zero(cls, p: int) -> "PadicNumber":
        return cls(p, None, 0, None)

    @classmethod
    def zero_to(cls, p: int, prec: int) -> "PadicNumber":
        return cls(p, prec, 0, prec)

    @classmethod
    def from_rational(cls, x, p: int, prec: int = DEFAULT_PRECISION) -> "PadicNumber":
        """``x`` known modulo ``p**prec`` (absolute)."""
        x = Fraction(x)
        if x == 0:
            return cls.exact_zero(p)
        num, den = x.numerator, x.denominator
        a, b = _vp(num, p), _vp(den, p)
        v = a - b
        if prec <= v:
            return cls.zero_to(p, prec)
        m = p ** (prec - v)
        unit = (num // p**a) * pow(den // p**b, -1, m) % m
        return cls(p, v, unit, prec)

    @classmethod
    def with_relative(cls, x, p: int, rel: int) -> "PadicNumber":
        """``x`` with ``rel`` significant p-adic digits."""
        x = Fraction(x)
        if x == 0:
            return cls.exact_zero(p)
        v = _vp(x.numerator, p) - _vp(x.denominator, p)
        return cls.from_rational(x, p, v + rel)

    def _normalized(self, v: int, s: int, prec: int) -> "PadicNumber":
        """Build from ``s * p**v`` known modulo ``p**prec``."""
        p = self.p
        if prec <= v:
            return PadicNumber.zero_to(p, prec)
        m = p ** (prec - v)
        s %= m
        if s == 0:
            return PadicNumber.zero_to(p, prec)
        while s % p == 0:
            s //= p
            v += 1
        return PadicNumber(p, v, s % p ** (prec - v), prec)

    def _coerce(self, other, rel: int | None = None) -> "PadicNumber":
        if isinstance(other, PadicNumber):
            return other
        x = Fraction(other)
        if x == 0:
            return PadicNumber.exact_zero(self.p)
        # exact scalars carry at least as many digits as self
        r = rel if rel is not None else self.rel_prec() + max(self.prec or 0, 0) + 8
        return PadicNumber.with_relative(x, self.p, max(r, 1))

    # -- inspection -----------------------------------------------------------

    def is_exact_zero(self) -> bool:
        return self.val is None

    def is_zero(self) -> bool:
        """True when indistinguishable from zero at the working precision."""
        return self.val is None or self.unit == 0

    def valuation(self):
        return self.val

    def rel_prec(self) -> int:
        if self.val is None:
            return 0
        return self.prec - self.val

    def lift(self) -> Fraction:
        if self.is_zero():
            return Fraction(0)
        return Fraction(self.unit) * Fraction(self.p) ** self.val

    def residue(self) -> int:
        """Image in F_p of an integral value."""
        if self.is_zero():
            if self.val is not None and self.prec < 1:
                raise PrecisionError("residue not determined")
            return 0
        if self.val < 0:
            raise ValueError("not p-integral")
        if self.val > 0:
            return 0
        return self.unit % self.p

    def __repr__(self):
        if self.val is None:
            return f"0 (exact, p={self.p})"
        return f"{self.unit}*{self.p}^{self.val} + O({self.p}^{self.prec})"

    # -- arithmetic -----------------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, PadicNumber):
            if Fraction(other) == 0:
                return self
            other = self._coerce(other, rel=None if self.val is None else
                                 max(self.prec - _vq(Fraction(other), self.p), 1))
        if self.val is None:
            return other
        if other.val is None:
            return self
        prec = min(self.prec, other.prec)
        m = min(self.val, other.val)
        p = self.p
        s = self.unit * p ** (self.val - m) + other.unit * p ** (other.val - m)
        return self._normalized(m, s, prec)

    __radd__ = __add__

    def __neg__(self):
        if self.val is None or self.unit == 0:
            return self
        return PadicNumber(self.p, self.val, (-self.unit) % self.p ** (self.prec - self.val), self.prec)

    def __sub__(self, other):
        if not isinstance(other, PadicNumber):
            return self + (-Fraction(other))
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, PadicNumber):
            x = Fraction(other)
            if x == 0:
                return PadicNumber.exact_zero(self.p)
            if self.val is None:
                return self
            return self * PadicNumber.with_relative(x, self.p, max(self.rel_prec(), 1))
        if self.val is None or other.val is None:
            return PadicNumber.exact_zero(self.p)
        v = self.val + other.val
        rel = min(self.rel_prec(), other.rel_prec())
        if self.unit == 0 or other.unit == 0:
            return PadicNumber.zero_to(self.p, v + rel)
        m = self.p**rel
        return PadicNumber(self.p, v, self.unit * other.unit % m, v + rel)

    __rmul__ = __mul__

    def inverse(self) -> "PadicNumber":
        if self.is_zero():
            raise ZeroDivisionError("p-adic division by (approximate) zero")
        rel = self.rel_prec()
        m = self.p**rel
        return PadicNumber(self.p, -self.val, pow(self.unit, -1, m), rel - self.val)

    def __truediv__(self, other):
        if not isinstance(other, PadicNumber):
            x = Fraction(other)
            if self.val is None:
                return self
            return self * PadicNumber.with_relative(1 / x, self.p, max(self.rel_prec(), 1))
        if self.val is None:
            return self
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, e: int):
        out = PadicNumber.with_relative(1, self.p, max(self.rel_prec(), 1))
        base = self if e >= 0 else self.inverse()
        for _ in range(abs(e)):
            out = out * base
        return out

    def eq_mod(self, other, n: int) -> bool:
        """Congruence modulo p**n (both sides must be known that far)."""
        d = self - other
        if d.val is None:
            return True
        if d.prec < n:
            raise PrecisionError(f"difference only known to p^{d.prec}, need p^{n}")
        return d.unit == 0 or d.val >= n

    def is_square(self) -> bool:
        if self.p == 2:
            raise NotImplementedError("2-adic squares are not used")
        if self.is_zero():
            return True
        return self.val % 2 == 0 and is_square_mod_p(self.unit, self.p)

    def sqrt(self) -> "PadicNumber":
        """Square root for odd p; the root whose unit part is the smaller
        residue modulo p."""
        if self.val is None:
            return self
        if self.unit == 0:
            return PadicNumber.zero_to(self.p, (self.prec + 1) // 2)
        if self.val % 2:
            raise ValueError("odd valuation: not a square")
        p, rel = self.p, self.rel_prec()
        r = sqrt_mod_p(self.unit % p, p)
        if r == 0:
            raise ValueError("not a square")
        mod = p
        while mod < p**rel:
            mod = min(mod * mod, p**rel)
            r = (r + self.unit * pow(r, -1, mod)) * pow(2, -1, mod) % mod
        v = self.val // 2
        return PadicNumber(p, v, r % p**rel, v + rel)


def _vq(x: Fraction, p: int) -> int:
    return _vp(x.numerator, p) - _vp(x.denominator, p)


class PadicQuad:
    """Element a + b*sqrt(n) of the unramified quadratic extension of Q_p,
    n the least quadratic non-residue modulo p."""

    __slots__ = ("a", "b", "n")

    def __init__(self, a: PadicNumber, b: PadicNumber, n: int):
        self.a, self.b, self.n = a, b, n

    @property
    def p(self) -> int:
        return self.a.p

    @classmethod
    def from_rational(cls, x, p: int, prec: int = DEFAULT_PRECISION, n: int | None = None):
        n = least_nonresidue(p) if n is None else n
        return cls(PadicNumber.from_rational(x, p, prec), PadicNumber.exact_zero(p), n)

    @classmethod
    def from_padic(cls, a: PadicNumber, n: int | None = None):
        n = least_nonresidue(a.p) if n is None else n
        return cls(a, PadicNumber.exact_zero(a.p), n)

    def _coerce(self, other) -> "PadicQuad":
        if isinstance(other, PadicQuad):
            return other
        if isinstance(other, PadicNumber):
            return PadicQuad(other, PadicNumber.exact_zero(self.p), self.n)
        a = self.a if not self.a.is_exact_zero() else self.b
        rel = max(a.rel_prec(), 1) + 8 if not a.is_exact_zero() else 40
        return PadicQuad(PadicNumber.with_relative(other, self.p, rel),
                         PadicNumber.exact_zero(self.p), self.n)

    def __add__(self, other):
        o = self._coerce(other)
        return PadicQuad(self.a + o.a, self.b + o.b, self.n)

    __radd__ = __add__

    def __neg__(self):
        return PadicQuad(-self.a, -self.b, self.n)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, (PadicQuad, PadicNumber)):
            return PadicQuad(self.a * other, self.b * other, self.n)
        o = self._coerce(other)
        return PadicQuad(self.a * o.a + self.b * o.b * self.n, self.a * o.b + self.b * o.a, self.n)

    __rmul__ = __mul__

    def conj(self):
        return PadicQuad(self.a, -self.b, self.n)

    def norm(self) -> PadicNumber:
        return self.a * self.a - self.b * self.b * self.n

    def inverse(self):
        return self.conj() * self.norm().inverse()

    def __truediv__(self, other):
        if not isinstance(other, (PadicQuad, PadicNumber)):
            return PadicQuad(self.a / other, self.b / other, self.n)
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def valuation(self):
        va, vb = self.a.val, self.b.val
        if va is None:
            return vb
        if vb is None:
            return va
        return min(va, vb)

    @property
    def prec(self):
        pa, pb = self.a.prec, self.b.prec
        if pa is None:
            return pb
        if pb is None:
            return pa
        return min(pa, pb)

    def is_zero(self) -> bool:
        return self.a.is_zero() and self.b.is_zero()

    def in_base(self) -> bool:
        return self.b.is_zero()

    def residue(self):
        """(a mod p, b mod p) for an integral value."""
        return self.a.residue(), self.b.residue()

    def __repr__(self):
        return f"[{self.a!r}] + [{self.b!r}]*sqrt({self.n})"

    @classmethod
    def sqrt_of(cls, x: PadicNumber, n: int | None = None) -> "PadicQuad":
        """Square root of an element of Q_p inside Q_p(sqrt n)."""
        n = least_nonresidue(x.p) if n is None else n
        if x.is_zero() or x.is_square():
            return cls(x.sqrt(), PadicNumber.exact_zero(x.p), n)
        return cls(PadicNumber.exact_zero(x.p), (x / n).sqrt(), n)


# --- formal power series ------------------------------------------------------


class FormalSeries:
    """``sum c_k t^k`` known modulo ``t^(order+1)``.

    Coefficients are :class:`PadicNumber` or :class:`PadicQuad` values.
    """

    def __init__(self, coeffs, order: int):
        coeffs = list(coeffs)[: order + 1]
        self.coeffs = coeffs
        self.order = order

    def __len__(self):
        return len(self.coeffs)

    def coeff(self, k: int):
        if k > self.order:
            raise PrecisionError(f"t^{k} beyond truncation order {self.order}")
        return self.coeffs[k] if k < len(self.coeffs) else 0

    def _zero(self):
        for c in self.coeffs:
            if isinstance(c, PadicQuad):
                return PadicQuad(PadicNumber.exact_zero(c.p), PadicNumber.exact_zero(c.p), c.n)
            if isinstance(c, PadicNumber):
                return PadicNumber.exact_zero(c.p)
        return 0

    def __add__(self, other: "FormalSeries") -> "FormalSeries":
        order = min(self.order, other.order)
        n = min(max(len(self.coeffs), len(other.coeffs)), order + 1)
        out = []
        for k in range(n):
            a = self.coeffs[k] if k < len(self.coeffs) else None
            b = other.coeffs[k] if k < len(other.coeffs) else None
            out.append(b if a is None else (a if b is None else a + b))
        return FormalSeries(out, order)

    def __neg__(self):
        return FormalSeries([-c for c in self.coeffs], self.order)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, FormalSeries):
            return FormalSeries([c * other for c in self.coeffs], self.order)
        order = min(self.order, other.order)
        a, b = self.coeffs, other.coeffs
        out = []
        for k in range(min(len(a) + len(b) - 1, order + 1)):
            acc = None
            for i in range(max(0, k - len(b) + 1), min(k, len(a) - 1) + 1):
                term = a[i] * b[k - i]
                acc = term if acc is None else acc + term
            out.append(acc)
        return FormalSeries(out, order)

    __rmul__ = __mul__

    def inverse(self) -> "FormalSeries":
        c0 = self.coeffs[0]
        inv0 = 1 / c0
        out = [inv0]
        for k in range(1, self.order + 1):
            acc = None
            for i in range(1, min(k, len(self.coeffs) - 1) + 1):
                term = self.coeffs[i] * out[k - i]
                acc = term if acc is None else acc + term
            out.append(self._zero() if acc is None else -(acc * inv0))
        return FormalSeries(out, self.order)

    def derivative(self) -> "FormalSeries":
        return FormalSeries([self.coeffs[k] * k for k in range(1, len(self.coeffs))], self.order - 1)

    def substitute_square(self) -> "FormalSeries":
        """s(t) -> s(t^2)."""
        out = []
        for c in self.coeffs:
            out += [c, self._zero()]
        return FormalSeries(out[: 2 * self.order + 1], 2 * self.order + 1)

    def evaluate(self, t):
        """Sum the series at ``t`` with ``v(t) >= 1``; the truncation tail is
        folded into the returned precision."""
        acc = None
        for c in reversed(self.coeffs):
            acc = c if acc is None else acc * t + c
        vt = t.valuation() if hasattr(t, "valuation") else None
        if vt is None or acc is None:
            return acc
        if vt < 1:
            raise PrecisionError("evaluation point must lie in the residue disk")
        tail = (self.order + 1) * vt + _min_coeff_val(self.coeffs)
        return _cap(acc, tail)


def _min_coeff_val(coeffs) -> int:
    vals = []
    for c in coeffs:
        v = c.valuation() if hasattr(c, "valuation") else None
        if v is not None:
            vals.append(v)
    return min(vals) if vals else 0


def _cap(x, prec: int):
    """Reduce the known precision of x to at most ``prec``."""
    if isinstance(x, PadicQuad):
        return PadicQuad(_cap(x.a, prec), _cap(x.b, prec), x.n)
    if x.val is None:
        return PadicNumber.zero_to(x.p, prec)
    if x.prec <= prec:
        return x
    return x._normalized(x.val, x.unit, prec)


def series_from_poly(poly, p: int, prec: int, order: int, n: int | None = None,
                     quad: bool = False) -> FormalSeries:
    """Series with exact rational polynomial coefficients."""
    coeffs = []
    for c in list(poly)[: order + 1]:
        x = PadicNumber.from_rational(c, p, prec)
        coeffs.append(PadicQuad.from_padic(x, n) if quad else x)
    return FormalSeries(coeffs, order)


def series_sqrt(s: FormalSeries, root0=None, floor: int | None = None) -> FormalSeries:
    """Square root of a series whose constant term is a unit square (odd p).

    ``root0`` fixes the square root of the constant term; by default it is
    :meth:`PadicNumber.sqrt` of it.
    """
    c0 = s.coeffs[0]
    p = c0.p
    if p == 2:
        raise ValueError("series_sqrt needs odd p")
    if c0.valuation() is None or c0.valuation() != 0:
        raise ValueError("constant term must be a p-adic unit")
    if root0 is None:
        if isinstance(c0, PadicQuad):
            if not c0.in_base():
                raise ValueError("pass root0 for constant terms outside Q_p")
            root0 = PadicQuad.sqrt_of(c0.a, c0.n)
        else:
            if not c0.is_square():
                raise ValueError("constant term is not a square")
            root0 = c0.sqrt()
    out = [root0]
    inv2r = 1 / (root0 * 2)
    for k in range(1, s.order + 1):
        acc = s.coeff(k) if k < len(s.coeffs) else None
        for i in range(1, k):
            term = out[i] * out[k - i]
            acc = -term if acc is None else acc - term
        out.append(s._zero() if acc is None else acc * inv2r)
    res = FormalSeries(out, s.order)
    if floor is not None:
        _check_floor(res, floor)
    return res


def series_integrate(s: FormalSeries, floor: int | None = None) -> FormalSeries:
    """Term t^k -> t^(k+1)/(k+1); each coefficient loses v_p(k+1) digits."""
    out = [s._zero()] + [s.coeffs[k] / (k + 1) for k in range(len(s.coeffs))]
    res = FormalSeries(out, s.order + 1)
    if floor is not None:
        _check_floor(res, floor)
    return res


def precision_flags(s: FormalSeries, floor: int) -> list[int]:
    """Indices of coefficients whose absolute precision is below ``floor``."""
    bad = []
    for k, c in enumerate(s.coeffs):
        pr = c.prec if hasattr(c, "prec") else None
        if pr is not None and pr < floor:
            bad.append(k)
    return bad


def _check_floor(s: FormalSeries, floor: int) -> None:
    bad = precision_flags(s, floor)
    if bad:
        raise PrecisionError(f"coefficients {bad} fall below precision floor {floor}")
