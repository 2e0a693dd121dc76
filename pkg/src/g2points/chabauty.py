"""Rank-0 and rank-1 Chabauty at a single prime.

A divisor class D = [Q1 + Q2 - D_inf] in the kernel of reduction mod p pairs
with omega_i = x^i dx / 2y through the tiny integral from iota(Q2) to Q1; both
endpoints lie in one residue disk because Q2 + iota(Q2) is linearly equivalent
to D_inf.  Disks at infinity are handled in the chart z = 1/x, Y = y/x^3, where
omega_0 = -z dz / 2Y and omega_1 = -dz / 2Y.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .arith.factor import factor_integer, is_square_mod_p, least_nonresidue
from .arith.padic import FormalSeries, PadicNumber, PadicQuad, PrecisionError
from .arith.poly import divmod_q, evaluate, reverse, trim
from .curve import HyperCurve, Point, sort_points
from .groups import jacobian_order
from .jacobian import MumfordPoint, jacobian_fp, jacobian_q, reduce_mod_p

DEFAULT_PRECISION = 6
ESCALATION_STEP = 4
MAX_ESCALATIONS = 3


class TorsionPointError(ValueError):
    """The input point has finite order; use the rank-0 path."""


class NotInKernel(ValueError):
    pass


class RamifiedDisk(NotImplementedError):
    pass


@dataclass(frozen=True)
class TinyIntegralResult:
    i0: PadicNumber
    i1: PadicNumber
    precision: int
    chart: str  # "affine", "infinity" or "none"
    disk: str  # "weierstrass", "ordinary" or "identity"

    def pair(self):
        return self.i0, self.i1


@dataclass(frozen=True)
class AnnihilatingDifferential:
    p: int
    alpha0: PadicNumber
    alpha1: PadicNumber
    residual: tuple  # (a0 mod p, a1 mod p)
    precision: int  # relative precision of the normalised pair
    m: int  # kernel multiple used

    def to_json(self) -> dict:
        return {"p": self.p, "residual": list(self.residual), "precision": self.precision, "m": self.m}


# --- kernel of reduction ---------------------------------------------------------------


def kernel_multiple(P: MumfordPoint, curve: HyperCurve, p: int) -> tuple[int, MumfordPoint]:
    """(m, mP) with m the order of P mod p, so that mP reduces to zero."""
    J = jacobian_q(curve.f)
    Jp = jacobian_fp(curve.f, p)
    n = jacobian_order(curve, p)
    Pp = reduce_mod_p(P, curve, p)
    m = Jp.order_dividing(Pp, n, factor_integer(n))
    mP = J.scalar_mul(m, P)
    if mP == J.identity:
        raise TorsionPointError(f"P has finite order dividing {m}")
    if reduce_mod_p(mP, curve, p) != Jp.identity:
        raise AssertionError("mP does not reduce to the identity")
    return m, mP


def kernel_order(P: MumfordPoint, curve: HyperCurve, p: int) -> int:
    Jp = jacobian_fp(curve.f, p)
    n = jacobian_order(curve, p)
    return Jp.order_dividing(reduce_mod_p(P, curve, p), n, factor_integer(n))


# --- p-adic helpers --------------------------------------------------------------------


def _vq(x: Fraction, p: int):
    if x == 0:
        return math.inf
    v, n, d = 0, x.numerator, x.denominator
    while n % p == 0:
        n //= p
        v += 1
    while d % p == 0:
        d //= p
        v -= 1
    return v


def _res(x: Fraction, p: int) -> int:
    return x.numerator * pow(x.denominator, -1, p) % p


def _hensel_root(F, x0: int, p: int, prec: int) -> int:
    """Root of F in Z_p congruent to x0, modulo p^prec (simple root mod p)."""
    mod = p ** (prec + 2)
    dF = [i * c for i, c in enumerate(F)][1:]
    x = x0
    for _ in range(prec.bit_length() + 3):
        fx = evaluate(F, x) % mod
        if fx == 0:
            break
        x = (x - fx * pow(evaluate(dF, x) % mod, -1, mod)) % mod
    return x


def _taylor(F, center):
    """Coefficients of F(center + t), center a p-adic value or an exact rational."""
    out = []
    n = len(F)
    for k in range(n):
        acc = None
        for i in range(k, n):
            if not F[i]:
                continue
            term = center ** (i - k) * (math.comb(i, k) * F[i]) if i > k else None
            if term is None:
                term = math.comb(i, k) * F[i]
            acc = term if acc is None else acc + term
        out.append(acc if acc is not None else 0)
    return out


def _cap(x, prec: int):
    if isinstance(x, PadicQuad):
        return PadicQuad(_cap(x.a, prec), _cap(x.b, prec), x.n)
    if x.is_exact_zero():
        return PadicNumber.zero_to(x.p, prec)
    if x.prec <= prec:
        return x
    if x.val is None or x.val >= prec:
        return PadicNumber.zero_to(x.p, prec)
    return PadicNumber(x.p, x.val, x.unit % x.p ** (prec - x.val), prec)


def _as_padic(x, p: int, prec: int) -> PadicNumber:
    if isinstance(x, PadicQuad):
        if not x.b.is_zero():
            raise AssertionError("Galois-stable integral left Q_p")
        return x.a
    if isinstance(x, PadicNumber):
        return x
    return PadicNumber.from_rational(x, p, prec)


def _tail_bound(order: int, vt, p: int, step: int = 1) -> int:
    """Lower bound for v(t^k / k) over the omitted terms k > order (k in step)."""
    best = math.inf
    for k in range(order + 1, order + 1 + 60 * step):
        best = min(best, k * vt - math.floor(math.log(k, p) + 1e-9))
    return math.floor(best)


# --- chart data ------------------------------------------------------------------------


def _chart_of(D: MumfordPoint, curve: HyperCurve, p: int):
    """Move the class to the chart where its support is integral.  Returns
    (chart, F, g, A, B) with A a monic quadratic or linear polynomial in the
    chart coordinate whose roots are the X-coordinates and B giving Y mod A."""
    f = curve.f
    a = tuple(Fraction(c) for c in D.a)
    b = tuple(Fraction(c) for c in D.b)
    if all(_vq(c, p) >= 0 for c in a):
        return "affine", f, ((1,), (0, 1)), a, b
    # reversed model: z = 1/x, Y = y z^3
    Frev = reverse(f, 6)
    k = len(a) - 1
    arev = tuple(reversed(a))  # a(x) x^-k in terms of z, up to the factor
    lead = arev[-1]
    if lead == 0:
        raise NotInKernel("support meets infinity in an unexpected way")
    A = tuple(c / lead for c in arev)
    if any(_vq(c, p) < 0 for c in A):
        raise NotInKernel("mixed affine and infinite support")
    # Y = b(1/z) z^3 as a polynomial in z, reduced modulo A
    bz = [Fraction(0)] * 4
    for i, c in enumerate(b):
        bz[3 - i] += c
    _, B = divmod_q(trim(bz), A)
    return "infinity", Frev, ((0, -1), (-1,)), A, tuple(B)


def tiny_integrals_at_infinity(D: MumfordPoint, curve: HyperCurve, p: int,
                               precision: int = DEFAULT_PRECISION) -> TinyIntegralResult:
    """(int omega_0, int omega_1) over the class D in the kernel of reduction."""
    if p <= 3 or not curve.is_good_reduction(p):
        raise ValueError(f"need a good prime p > 3, got {p}")
    J = jacobian_q(curve.f)
    if D == J.identity:
        z = PadicNumber.exact_zero(p)
        return TinyIntegralResult(z, z, precision, "none", "identity")
    if reduce_mod_p(D, curve, p) != jacobian_fp(curve.f, p).identity:
        raise NotInKernel("class does not reduce to the identity")
    work = precision + 6
    k = len(D.a) - 1
    if k == 1:
        return _integrals_one_point(D, curve, p, precision, work)
    if k != 2:
        raise NotInKernel(f"unexpected representation {D}")
    chart, F, g, A, B = _chart_of(D, curve, p)
    a0, a1 = A[0], A[1]
    B0 = B[0] if B else Fraction(0)
    B1 = B[1] if len(B) > 1 else Fraction(0)
    Xbar = _res(-a1 / 2, p)
    if _vq(a1 * a1 - 4 * a0, p) < 2:
        raise NotInKernel("the two support points lie in different residue disks")
    if evaluate(F, Xbar) % p == 0:
        # Weierstrass disk: only the symmetric functions of Y1, Y2 enter
        e1 = -B1 * a1 + 2 * B0
        e2 = B1 * B1 * a0 - B0 * B1 * a1 + B0 * B0
        I = _weierstrass_integrals(F, g, Xbar, e1, e2, p, precision, work)
        return TinyIntegralResult(I[0], I[1], precision, chart, "weierstrass")
    # ordinary disk: centre xi, endpoints xi + delta (Q1) and xi - delta (iota Q2)
    xi = -a1 / 2
    Delta = (a1 * a1 - 4 * a0) / 4
    vD = _vq(Delta, p)
    if vD != math.inf and vD % 2:
        raise RamifiedDisk("the support points are conjugate over a ramified extension")
    n = least_nonresidue(p)
    Dp = PadicNumber.from_rational(Delta, p, work + 2 * (vD if vD != math.inf else 0))
    delta = PadicQuad.sqrt_of(Dp, n) if not Dp.is_exact_zero() else PadicQuad.from_rational(0, p, work, n)
    mid = PadicQuad.from_rational(B1 * xi + B0, p, work, n)
    Y1 = mid + delta * PadicNumber.from_rational(B1, p, work)
    Y2 = mid - delta * PadicNumber.from_rational(B1, p, work)
    if _qval(Y1 + Y2) < 1:
        raise NotInKernel("iota(Q2) and Q1 lie in different residue disks")
    I = _ordinary_integrals(F, g, xi, delta, -delta, Y1, p, precision, work, n)
    return TinyIntegralResult(I[0], I[1], precision, chart, "ordinary")


def _integrals_one_point(D, curve, p, precision, work):
    """Classes Q1 + inf_s - D_inf (sextic, tag +-1) or Q1 - inf (quintic)."""
    x1 = Fraction(-D.a[0])
    y1 = Fraction(D.b[0]) if D.b else Fraction(0)
    if _vq(x1, p) >= 0:
        raise NotInKernel("affine point cannot cancel against infinity")
    z1 = 1 / x1
    Y1 = y1 * z1**3
    Frev = reverse(curve.f, 6)
    g = ((0, -1), (-1,))
    n = least_nonresidue(p)
    if curve.degree == 5:
        # the point at infinity is the Weierstrass point z = 0
        I = _weierstrass_integrals(Frev, g, 0, Y1, Fraction(0), p, precision, work)
        return TinyIntegralResult(I[0], I[1], precision, "infinity", "weierstrass")
    # sextic: D = Q1 - inf_{-s} where s is the tag sign; start at z = 0, Y = -s*sqrt(lc)
    s = jacobian_q(curve.f).s
    start_Y = -s if D.tag > 0 else s
    zero = PadicQuad.from_rational(0, p, work, n)
    # centre at z = 0 with branch Y(0) = start_Y; endpoint t = z1
    I = _ordinary_integrals(Frev, g, Fraction(0), PadicQuad.from_rational(z1, p, work, n), zero,
                            PadicQuad.from_rational(start_Y, p, work, n), p, precision, work, n,
                            branch_at_center=True)
    return TinyIntegralResult(I[0], I[1], precision, "infinity", "ordinary")


def _ordinary_integrals(F, g, xi, t_end, t_start, Y_end, p, precision, work, n, branch_at_center=False):
    """int_{t_start}^{t_end} g_i(xi + t) dt / 2Y(t) where Y(t)^2 = F(xi + t) and
    the branch is fixed by Y(t_end) = Y_end (or Y(0) = Y_end if branch_at_center)."""
    vt = min(_qval(t_end), _qval(t_start))
    if vt < 1:
        raise NotInKernel("endpoints not in one residue disk")
    order = work + 4
    while _tail_bound(order, vt, p) < precision + 1:
        order += 2
    coeffs = _taylor(F, Fraction(xi))
    c0 = PadicNumber.from_rational(coeffs[0], p, work)
    if c0.valuation() != 0:
        raise AssertionError("ordinary disk with non-unit F at the centre")
    eta = PadicQuad.sqrt_of(c0, n)
    # Y(t_end) is congruent to Y(0) modulo p, which fixes the branch
    target = Y_end
    if (eta - target).valuation() is None or (eta - target).valuation() < 1:
        eta = -eta
    if (eta - target).valuation() is not None and (eta - target).valuation() < 1:
        raise NotInKernel("branch mismatch: endpoints in different disks")
    series = FormalSeries([PadicQuad.from_rational(c, p, work, n) for c in coeffs], order)
    Y = _series_sqrt_branch(series, eta)
    inv2Y = (Y * 2).inverse()
    out = []
    for gi in g:
        gs = FormalSeries([PadicQuad.from_rational(c, p, work, n) for c in _taylor(gi, Fraction(xi))], order)
        integrand = gs * inv2Y
        val = _antiderivative_at(integrand, t_end, p) - _antiderivative_at(integrand, t_start, p)
        tail = _tail_bound(order, vt, p) + _min_val(integrand)
        val = _cap(val, min(tail, work))
        out.append(_as_padic(val, p, work))
    return out


def _series_sqrt_branch(s: FormalSeries, root0):
    out = [root0]
    inv = (root0 * 2).inverse()
    for k in range(1, s.order + 1):
        acc = s.coeffs[k] if k < len(s.coeffs) else s._zero()
        for i in range(1, k):
            acc = acc - out[i] * out[k - i]
        out.append(acc * inv)
    return FormalSeries(out, s.order)


def _qval(x):
    v = x.valuation()
    return math.inf if v is None else v


def _min_val(s: FormalSeries) -> int:
    vals = [c.valuation() for c in s.coeffs if c.valuation() is not None]
    return min(vals) if vals else 0


def _antiderivative_at(s: FormalSeries, t, p):
    acc = None
    tk = t
    for k, c in enumerate(s.coeffs):
        term = c * tk / (k + 1)
        acc = term if acc is None else acc + term
        tk = tk * t
    return acc


def _weierstrass_integrals(F, g, Xbar, e1, e2, p, precision, work):
    """H(Y1) + H(Y2) where H is the odd antiderivative of g(X) dX / 2Y in the
    uniformiser Y at the Weierstrass point of the disk; e1 = Y1 + Y2, e2 = Y1 Y2."""
    mu = min(_vq(Fraction(e1), p), _vq(Fraction(e2), p) / 2)
    if mu <= 0:
        raise NotInKernel("points not in the Weierstrass disk")
    if mu == math.inf:
        z = PadicNumber.exact_zero(p)
        return [z, z]
    # number of w-terms: term j contributes Y^(2j+1) / (2j+1)
    J = work + 2
    while _tail_bound(2 * J + 1, mu, p, 2) < precision + 1:
        J += 1
    root = _hensel_root(F, Xbar, p, work + 4)
    if evaluate(F, 0) == 0 and Xbar % p == 0:
        root = 0
    Xh = PadicNumber.from_rational(root, p, work + 4) if root else PadicNumber.exact_zero(p)
    tay = _taylor(F, Xh) if root else [PadicNumber.from_rational(c, p, work + 4) for c in F]
    e = [PadicNumber.from_rational(c, p, work + 4) if not isinstance(c, PadicNumber) else c for c in tay]
    # w = e1 u + e2 u^2 + ... ; invert to u(w)
    order = J + 1
    E = FormalSeries([PadicNumber.exact_zero(p)] + e[1:], order)
    inv_e1 = e[1].inverse()
    if e[1].valuation() != 0:
        raise AssertionError("Weierstrass root is not simple mod p")
    w = FormalSeries([PadicNumber.exact_zero(p), PadicNumber.from_rational(1, p, work + 4)], order)
    u = w * inv_e1
    for _ in range(order + 1):
        # u = (w - sum_{k>=2} e_k u^k) / e1
        acc = None
        upow = u * u
        for k in range(2, len(e)):
            term = upow * e[k]
            acc = term if acc is None else acc + term
            upow = upow * u
        u = (w - acc) * inv_e1 if acc is not None else w * inv_e1
    du = u.derivative()
    X = u + FormalSeries([Xh], order) if root else u
    # power sums s_j = Y1^j + Y2^j
    E1 = PadicNumber.from_rational(e1, p, work + 4) if e1 else PadicNumber.exact_zero(p)
    E2 = PadicNumber.from_rational(e2, p, work + 4) if e2 else PadicNumber.exact_zero(p)
    sums = [PadicNumber.from_rational(2, p, work + 4), E1]
    for j in range(2, 2 * J + 3):
        sums.append(E1 * sums[-1] - E2 * sums[-2])
    out = []
    for gi in g:
        # g(X(w)) as a series
        gs = None
        Xk = None
        for k, c in enumerate(gi):
            Xk = FormalSeries([PadicNumber.from_rational(1, p, work + 4)], order) if k == 0 else Xk * X
            if c:
                term = Xk * c
                gs = term if gs is None else gs + term
        G = gs * du
        acc = None
        for j, c in enumerate(G.coeffs[:J + 1]):
            term = c * sums[2 * j + 1] / (2 * j + 1)
            acc = term if acc is None else acc + term
        tail = _tail_bound(2 * J + 1, mu, p, 2) + min(_min_val(G), 0)
        out.append(_cap(acc, min(tail, work)))
    return out


# --- annihilating differential ---------------------------------------------------------


def annihilating_differential(P: MumfordPoint, curve: HyperCurve, p: int,
                              precision: int = DEFAULT_PRECISION) -> AnnihilatingDifferential:
    m, mP = kernel_multiple(P, curve, p)
    prec = precision
    for _ in range(MAX_ESCALATIONS + 1):
        T = tiny_integrals_at_infinity(mP, curve, p, prec)
        out = _normalise(T.i1, -T.i0, p, m)
        if out is not None and out.precision >= 1:
            return out
        prec += ESCALATION_STEP
    raise PrecisionError(f"annihilating differential undetermined at p = {p} after escalation")


def _normalise(a0: PadicNumber, a1: PadicNumber, p: int, m: int):
    if a0.is_zero() and a1.is_zero():
        return None
    v0 = a0.valuation() if not a0.is_zero() else math.inf
    v1 = a1.valuation() if not a1.is_zero() else math.inf
    v = min(v0, v1)
    b0 = _shift(a0, -v)
    b1 = _shift(a1, -v)
    rel = min(b0.prec, b1.prec)
    return AnnihilatingDifferential(p, b0, b1, (b0.residue(), b1.residue()), rel, m)


def _shift(x: PadicNumber, k: int) -> PadicNumber:
    """x * p^k."""
    if x.is_exact_zero():
        return x
    if x.unit == 0:
        return PadicNumber.zero_to(x.p, x.prec + k)
    return PadicNumber(x.p, x.val + k, x.unit, x.prec + k)


def pairing(omega: AnnihilatingDifferential, T: TinyIntegralResult) -> PadicNumber:
    return omega.alpha0 * T.i0 + omega.alpha1 * T.i1


# --- injectivity criteria --------------------------------------------------------------


def omega_nonvanishing(residual, curve: HyperCurve, p: int) -> bool:
    """True when the reduced differential (a0 + a1 x) dx / 2y has no zero on
    C(F_p), so that C(Q) -> C(F_p) is injective."""
    a0, a1 = residual[0] % p, residual[1] % p
    if p <= 2:
        raise ValueError("need an odd prime")
    if a0 == 0 and a1 == 0:
        raise ValueError("zero differential")
    if a1:
        xi = (-a0 * pow(a1, -1, p)) % p
        v = evaluate(curve.f, xi) % p
        return v != 0 and not is_square_mod_p(v, p)
    if curve.degree == 5:
        return False
    return not is_square_mod_p(curve.lc % p, p)


def vanishing_x(residual, p: int):
    """x-coordinate in F_p (or None for infinity) where the reduced differential vanishes."""
    a0, a1 = residual[0] % p, residual[1] % p
    if a1:
        return (-a0 * pow(a1, -1, p)) % p
    return None


def is_weierstrass(Q: Point, curve: HyperCurve) -> bool:
    if Q.inf:
        return Q.inf == "inf"
    return Q.y == 0


def split_injectivity(Q: Point, curve: HyperCurve, p: int) -> bool:
    """Injectivity of C(Q) -> C(F_p) when the global annihilating differential
    vanishes at the rational point Q (Weierstrass, or with non-Weierstrass
    reduction)."""
    if p <= 3:
        raise ValueError("need p > 3")
    if is_weierstrass(Q, curve):
        return True
    if Q.inf:
        return True  # inf+- on a sextic model never reduce to Weierstrass points at good p
    x = Fraction(Q.x)
    if _vq(x, p) < 0:
        return curve.degree == 6
    return evaluate(curve.f, _res(x, p)) % p != 0


# --- rank zero -------------------------------------------------------------------------


def rank0_points(curve: HyperCurve, torsion) -> list[Point]:
    """C(Q) when J(Q) is torsion, by pulling back Q -> [2Q - D_inf]."""
    if not torsion.proved:
        raise ValueError("torsion subgroup is not proved; refusing to claim completeness")
    J = jacobian_q(curve.f)
    out = set()
    f = curve.f
    for T in torsion.elements:
        if T == J.identity:
            for r in _rational_roots(f):
                out.add(Point(r, Fraction(0)))
            if curve.degree == 5:
                out.add(Point(inf="inf"))
            continue
        a, b, tag = T
        if len(a) == 1 and J.split and abs(tag) == 2:
            out.add(Point(inf="inf+" if tag == 2 else "inf-"))
            continue
        if len(a) == 3:
            a1, a0 = Fraction(a[1]), Fraction(a[0])
            xi = -a1 / 2
            if a1 * a1 == 4 * a0:
                y = evaluate(tuple(Fraction(c) for c in b), xi) if b else Fraction(0)
                if y != 0 and y * y == evaluate(f, xi):
                    out.add(Point(xi, y))
    return sort_points(out)


def _rational_roots(f) -> list[Fraction]:
    """Rational roots of an integer polynomial by the rational root theorem on
    the primitive part (divisors of the end coefficients)."""
    f = list(f)
    shift = 0
    while f and f[0] == 0:
        f.pop(0)
        shift += 1
    roots = {Fraction(0)} if shift else set()
    if len(f) <= 1:
        return sorted(roots)
    lead, const = abs(f[-1]), abs(f[0])
    for num in _divisors(const):
        for den in _divisors(lead):
            for s in (1, -1):
                x = Fraction(s * num, den)
                if evaluate(f, x) == 0:
                    roots.add(x)
    return sorted(roots)


def _divisors(n: int) -> list[int]:
    fac = factor_integer(n)
    out = [1]
    for q, e in fac.items():
        out = [d * q**k for d in out for k in range(e + 1)]
    return out
