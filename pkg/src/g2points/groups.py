"""Finite group structure of J(F_p), torsion of J(Q), and q-saturation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product

import sympy
import sympy.ntheory.modular

from .arith.factor import factor_integer, valuation, is_probable_prime, is_square_mod_p, primes_up_to
from .arith.fields import Fp2Field
from .curve import BadReduction, HyperCurve, Point, count_points, enumerate_points, search_rational_points
from .jacobian import (
    Jacobian,
    JacobianFp,
    MumfordPoint,
    difference_embed,
    embed_point,
    jacobian_fp,
    jacobian_q,
    reduce_mod_p,
)

ENUMERATION_CAP = 200


class EnumerationCapExceeded(RuntimeError):
    pass


def jacobian_order(curve: HyperCurve, p: int) -> int:
    """#J(F_p) from #C(F_p) and #C(F_{p^2}) via the L-polynomial at 1."""
    n1 = count_points(curve, p, 1)
    n2 = count_points(curve, p, 2)
    c1 = n1 - p - 1
    c2 = (n2 - p * p - 1 + c1 * c1) // 2
    return 1 + c1 + c2 + p * c1 + p * p


def _quadratic_classes(J: JacobianFp, pts: list[Point]) -> list[MumfordPoint]:
    """Classes with deg a = 2 whose a splits over F_p."""
    out = []
    aff = [q for q in pts if not q.inf]
    p = J.p
    for i, P1 in enumerate(aff):
        if P1.y:
            out.append(J.from_effective([P1, P1]))
        for P2 in aff[i + 1 :]:
            if P2.x != P1.x:
                out.append(J.from_effective([P1, P2]))
    return out


def _irreducible_classes(J: JacobianFp) -> list[MumfordPoint]:
    """Classes whose a-polynomial is irreducible over F_p."""
    p = J.p
    K = Fp2Field(p)
    f = J.f
    out = []
    for u1, u0 in product(range(p), repeat=2):
        disc = (u1 * u1 - 4 * u0) % p
        if disc == 0 or is_square_mod_p(disc, p):
            continue
        root = K.sqrt(K(disc))
        alpha = (K(-u1) + root) * K(pow(2, -1, p))
        val = K.zero
        for c in reversed(f):
            val = val * alpha + c
        if not val:
            out.append(MumfordPoint((u0, u1, 1), (), 0))
            continue
        if not K.is_square(val):
            continue
        s = K.sqrt(val)
        abar = alpha.conj()
        for sign in (1, -1):
            ss = s * sign
            v1 = (ss - ss.conj()) / (alpha - abar)
            v0 = ss - v1 * alpha
            assert v1.b == 0 and v0.b == 0
            b = tuple(c for c in (v0.a, v1.a))
            b = b if b[1] else ((b[0],) if b[0] else ())
            out.append(MumfordPoint((u0, u1, 1), b, 0))
    return out


def enumerate_jacobian(curve: HyperCurve, p: int, cap: int = ENUMERATION_CAP) -> list[MumfordPoint]:
    if p > cap:
        raise EnumerationCapExceeded(
            f"p = {p} exceeds the enumeration cap {cap}; a baby-step giant-step method would be needed"
        )
    J = jacobian_fp(curve.f, p)
    pts = enumerate_points(curve, p)
    out = [J.identity]
    if J.split:
        out += [MumfordPoint((1,), (), 2), MumfordPoint((1,), (), -2)]
    for P in pts:
        if P.inf:
            continue
        a = ((-P.x) % p, 1)
        b = (P.y,) if P.y else ()
        if J.deg == 5:
            out.append(MumfordPoint(a, b, 0))
        elif J.split:
            out += [MumfordPoint(a, b, 1), MumfordPoint(a, b, -1)]
    out += _quadratic_classes(J, pts)
    out += _irreducible_classes(J)
    return out


# --- abstract finite abelian groups ------------------------------------------------------


def smith_normal_form(rows: list[list[int]], ncols: int):
    """Return (diag, V) with U A V = diag for some unimodular U; V is ncols x ncols."""
    A = [list(r) + [0] * (ncols - len(r)) for r in rows]
    m, n = len(A), ncols
    V = [[int(i == j) for j in range(n)] for i in range(n)]

    def col_op(j1, j2, c):  # col j2 -= c * col j1
        for r in A:
            r[j2] -= c * r[j1]
        for r in V:
            r[j2] -= c * r[j1]

    def col_swap(j1, j2):
        for r in A:
            r[j1], r[j2] = r[j2], r[j1]
        for r in V:
            r[j1], r[j2] = r[j2], r[j1]

    t = 0
    while t < min(m, n):
        # pivot: smallest nonzero entry in the remaining block
        best = None
        for i in range(t, m):
            for j in range(t, n):
                if A[i][j] and (best is None or abs(A[i][j]) < abs(A[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        i, j = best
        A[t], A[i] = A[i], A[t]
        col_swap(t, j)
        done = False
        while not done:
            done = True
            piv = A[t][t]
            for j in range(t + 1, n):
                if A[t][j]:
                    col_op(t, j, A[t][j] // piv)
                    if A[t][j]:
                        col_swap(t, j)
                        done = False
                        break
            if not done:
                continue
            piv = A[t][t]
            for i in range(t + 1, m):
                if A[i][t]:
                    c = A[i][t] // piv
                    A[i] = [x - c * y for x, y in zip(A[i], A[t])]
                    if A[i][t]:
                        A[t], A[i] = A[i], A[t]
                        done = False
                        break
            if not done:
                continue
            # divisibility of the rest of the block by the pivot
            piv = A[t][t]
            for i in range(t + 1, m):
                for j in range(t + 1, n):
                    if A[i][j] % piv:
                        A[t] = [x + y for x, y in zip(A[t], A[i])]
                        done = False
                        break
                if not done:
                    break
        if A[t][t] < 0:
            A[t] = [-x for x in A[t]]
        t += 1
    diag = [A[i][i] if i < m else 0 for i in range(n)]
    return diag, V


def _invert_unimodular(V):
    M = sympy.Matrix(V)
    inv = M.inv()
    return [[int(inv[i, j]) for j in range(M.cols)] for i in range(M.rows)]


@dataclass
class FiniteAbelianGroup:
    order: int
    invariants: tuple
    generators: tuple
    dlog: dict
    add: object = field(repr=False, default=None)
    identity: object = None
    p: int | None = None

    @property
    def exponent(self) -> int:
        return self.invariants[-1] if self.invariants else 1

    def log(self, x) -> tuple:
        return self.dlog[x]

    def element(self, vec):
        acc = self.identity
        for e, g in zip(vec, self.generators):
            acc = self.add(acc, _mul(self.add, self.identity, e, g))
        return acc

    def order_of(self, x) -> int:
        vec = self.dlog[x]
        o = 1
        for e, n in zip(vec, self.invariants):
            o = o * (n // math.gcd(e, n)) // math.gcd(o, n // math.gcd(e, n))
        return o


def _mul(add, identity, n, g):
    acc, base = identity, g
    while n:
        if n & 1:
            acc = add(acc, base)
        n >>= 1
        if n:
            base = add(base, base)
    return acc


def group_structure(elements, add, identity) -> FiniteAbelianGroup:
    """Invariant factors, generators and a complete discrete-log table of the
    finite abelian group on ``elements`` under ``add``."""
    table = {identity: ()}
    gens = []
    relations = []
    for g in elements:
        if g in table:
            continue
        k = len(gens)
        x, m = g, 1
        while x not in table:
            x = add(x, g)
            m += 1
            if m > len(elements) + 1:
                raise RuntimeError("element order exceeds group size: closure failure")
        rel = [-c for c in table[x]] + [0] * (k - len(table[x])) + [m]
        relations.append(rel)
        coset = [(h, vec + (0,) * (k - len(vec))) for h, vec in table.items()]
        new = {h: vec + (0,) for h, vec in coset}
        for j in range(1, m):
            coset = [(add(h, g), vec) for h, vec in coset]
            for h, vec in coset:
                new[h] = vec + (j,)
        table = new
        gens.append(g)
    n = len(gens)
    if len(table) != len(set(elements)) and set(table) != set(elements):
        raise RuntimeError("inconsistent closure: table and element set differ")
    diag, V = smith_normal_form(relations, n)
    Vinv = _invert_unimodular(V) if n else []
    keep = [j for j in range(n) if abs(diag[j]) != 1]
    invariants = tuple(abs(diag[j]) for j in keep)
    new_gens = []
    for j in keep:
        acc = identity
        for i in range(n):
            c = Vinv[j][i] % len(table)  # the group order kills every element
            if c:
                acc = add(acc, _mul(add, identity, c, gens[i]))
        new_gens.append(acc)
    dlog = {}
    for h, vec in table.items():
        vec = vec + (0,) * (n - len(vec))
        y = tuple(sum(vec[i] * V[i][j] for i in range(n)) % invariants[t] for t, j in enumerate(keep))
        dlog[h] = y
    order = math.prod(invariants)
    assert order == len(table)
    for g, d in zip(new_gens, invariants):
        if _mul(add, identity, d, g) != identity:
            raise RuntimeError("generator order does not match its invariant")
    return FiniteAbelianGroup(order, invariants, tuple(new_gens), dlog, add, identity)


@lru_cache(maxsize=256)
def jacobian_group(f: tuple, p: int, cap: int = ENUMERATION_CAP) -> FiniteAbelianGroup:
    curve = HyperCurve(f)
    J = jacobian_fp(curve.f, p)
    elements = enumerate_jacobian(curve, p, cap)
    G = group_structure(elements, J.add, J.identity)
    G.p = p
    return G


def good_primes(curve: HyperCurve, count: int | None = None, start: int = 3, bound: int | None = None):
    out = []
    p = start
    while True:
        if bound is not None and p > bound:
            return out
        if is_probable_prime(p) and curve.is_good_reduction(p):
            out.append(p)
            if count is not None and len(out) >= count:
                return out
        p += 1


# --- torsion ----------------------------------------------------------------------------


@dataclass
class TorsionResult:
    invariants: tuple
    generators: tuple
    elements: tuple
    proved: bool
    bound: int
    primes: tuple
    structure_bound: int = 0

    @property
    def order(self) -> int:
        return len(self.elements)

    def to_json(self) -> dict:
        return {
            "invariants": list(self.invariants),
            "generators": [g.to_json() for g in self.generators],
            "rigor": "proved" if self.proved else "lower-bound-only",
            "bound": self.bound,
            "structure_bound": self.structure_bound,
            "primes": list(self.primes),
        }


def torsion_order_bound(curve: HyperCurve, n_primes: int = 8) -> tuple[int, tuple]:
    primes = good_primes(curve, n_primes)
    B = 0
    for p in primes:
        B = math.gcd(B, jacobian_order(curve, p))
    return B, tuple(primes)


def _ell_exponents(invariants, ell: int) -> list[int]:
    out = []
    for n in invariants:
        e = 0
        while n % ell == 0:
            n //= ell
            e += 1
        if e:
            out.append(e)
    return sorted(out, reverse=True)


def structural_torsion_bound(curve: HyperCurve, B: int, primes, two_rank: int | None = None, cap: int = 60) -> int:
    """Largest order of a group embedding into J(F_p) for every small good p
    in ``primes``: for each l | B, the l-parts are compared componentwise.
    ``two_rank`` (the exact 2-rank of J(Q)) caps the number of 2-components."""
    small = [p for p in primes if p <= cap]
    if len(small) < 2:
        return B
    structs = [jacobian_group(curve.f, p).invariants for p in small]
    out = 1
    for ell in factor_integer(B):
        parts = [_ell_exponents(inv, ell) for inv in structs]
        width = min(len(x) for x in parts)
        if ell == 2 and two_rank is not None:
            width = min(width, two_rank)
        exps = [min(x[i] for x in parts) for i in range(width)]
        out *= ell ** min(sum(exps), valuation(B, ell))
    return out


def _is_torsion(D, curve, J, p, bound) -> int:
    """Order of D if D is torsion (else 0), using a good odd prime p."""
    Dp = reduce_mod_p(D, curve, p)
    Jp = jacobian_fp(curve.f, p)
    n = Jp.order_dividing(Dp, bound, factor_integer(bound)) if Jp.scalar_mul(bound, Dp) == Jp.identity else 0
    if n == 0:
        return 0
    return n if J.scalar_mul(n, D) == J.identity else 0


def two_torsion_candidates(curve: HyperCurve, J: Jacobian) -> list[MumfordPoint]:
    x = sympy.Symbol("x")
    poly = sympy.Poly(list(reversed(curve.f)), x)
    _, facs = sympy.factor_list(poly)
    lin, quad = [], []
    for g, _e in facs:
        c = [Fraction(int(a)) for a in reversed(g.all_coeffs())]
        c = tuple(a / c[-1] for a in c)
        if len(c) == 2:
            lin.append(c)
        elif len(c) == 3:
            quad.append(c)
    out = [MumfordPoint(q, (), 0) for q in quad]
    for i, a in enumerate(lin):
        for b in lin[i + 1 :]:
            out.append(MumfordPoint((a[0] * b[0], a[0] + b[0], Fraction(1)), (), 0))
        if curve.degree == 5:
            out.append(MumfordPoint(a, (), 0))
    return out


def _rationals(h: int):
    seen = set()
    for n in range(1, h + 1):
        for m in range(-h, h + 1):
            if math.gcd(m, n) == 1:
                seen.add(Fraction(m, n))
    return sorted(seen)


def _rational_sqrt(t: Fraction):
    if t < 0:
        return None
    a, b = math.isqrt(t.numerator), math.isqrt(t.denominator)
    if a * a == t.numerator and b * b == t.denominator:
        return Fraction(a, b)
    return None


def mumford_search(curve: HyperCurve, height: int) -> list[MumfordPoint]:
    """Classes (x^2 + u1 x + u0, v1 x + v0) over Q with u1, u0 of height <= height."""
    f = [Fraction(c) for c in curve.f]
    out = []
    for u1, u0 in product(_rationals(height), repeat=2):
        # f mod u = f1 x + f0
        r = list(f)
        for i in range(len(r) - 1, 1, -1):
            c = r[i]
            r[i] = Fraction(0)
            r[i - 1] -= c * u1
            r[i - 2] -= c * u0
        f0, f1 = r[0], r[1]
        sols = []
        if f1 == 0:
            s = _rational_sqrt(f0)
            if s is not None:
                sols += [(s, Fraction(0)), (-s, Fraction(0))]
        A, Bc, C = u1 * u1 - 4 * u0, 2 * f1 * u1 - 4 * f0, f1 * f1
        ts = []
        if A == 0:
            if Bc:
                ts = [-C / Bc]
        else:
            disc = Bc * Bc - 4 * A * C
            s = _rational_sqrt(disc)
            if s is not None:
                ts = [(-Bc + s) / (2 * A), (-Bc - s) / (2 * A)]
        for t in set(ts):
            v1 = _rational_sqrt(t) if t else None
            if not v1:
                continue
            for sv in (v1, -v1):
                v0 = (f1 + u1 * sv * sv) / (2 * sv)
                sols.append((v0, sv))
        for v0, v1 in set(sols):
            b = (v0, v1) if v1 else ((v0,) if v0 else ())
            D = MumfordPoint((u0, u1, Fraction(1)), b, 0)
            if jacobian_q(curve.f).is_valid(D):
                out.append(D)
    return out


def _closure(J: Jacobian, gens) -> set:
    elems = {J.identity}
    frontier = [J.identity]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = J.add(x, g)
                if y not in elems:
                    elems.add(y)
                    nxt.append(y)
        frontier = nxt
    return elems


def torsion_subgroup(
    curve: HyperCurve,
    n_primes: int = 8,
    point_height: int = 50,
    mumford_height: int = 4,
) -> TorsionResult:
    J = jacobian_q(curve.f)
    B, primes = torsion_order_bound(curve, n_primes)
    p0 = primes[0]
    if B == 1:
        return TorsionResult((), (), (J.identity,), True, 1, primes, 1)
    two = two_torsion_candidates(curve, J)
    two_rank = len(_closure(J, two)).bit_length() - 1
    Bs = structural_torsion_bound(curve, B, primes, two_rank)
    cands = list(two)
    pts = search_rational_points(curve, point_height)
    for P in pts:
        for Q in pts:
            if P != Q:
                cands.append(embed_point(P, J, Q))
    cands += [difference_embed(P, J) for P in pts]
    cands += mumford_search(curve, mumford_height)
    found = []
    seen = set()
    for D in cands:
        if D in seen or not J.is_valid(D):
            continue
        seen.add(D)
        if _is_torsion(D, curve, J, p0, B):
            found.append(D)
    elems = sorted(_closure(J, found), key=repr)
    G = group_structure(elems, J.add, J.identity)
    proved = len(elems) == Bs
    return TorsionResult(G.invariants, G.generators, tuple(elems), proved, B, primes, Bs)


# --- saturation ------------------------------------------------------------------------


def _rank_mod_q(rows, q: int) -> int:
    M = [list(r) for r in rows]
    rank, col = 0, 0
    ncols = len(M[0]) if M else 0
    for col in range(ncols):
        piv = next((i for i in range(rank, len(M)) if M[i][col] % q), None)
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        inv = pow(M[rank][col], -1, q)
        M[rank] = [x * inv % q for x in M[rank]]
        for i in range(len(M)):
            if i != rank and M[i][col] % q:
                c = M[i][col]
                M[i] = [(x - c * y) % q for x, y in zip(M[i], M[rank])]
        rank += 1
    return rank


def is_p_saturated(
    curve: HyperCurve,
    generators,
    q: int,
    torsion: TorsionResult | None = None,
    ell_bound: int = ENUMERATION_CAP,
    max_primes: int = 12,
) -> str:
    """"saturated" only when G/qG injects into the product of J(F_l)/qJ(F_l)
    over the tested primes l and J(Q)[q] is known to lie in G; otherwise
    "unknown"."""
    gens = list(generators)
    if torsion is not None and torsion.proved:
        gens += [t for t in torsion.generators]
    elif torsion_order_bound(curve)[0] % q == 0:
        return "unknown"
    # components of G/qG: infinite-order generators count once, torsion
    # generators only when q divides their order
    J = jacobian_q(curve.f)
    relevant = []
    for g in gens:
        o = 0
        if torsion is not None and g in torsion.generators:
            o = _torsion_order(J, g, torsion)
        if o == 0 or o % q == 0:
            relevant.append(g)
    if not relevant:
        return "saturated"
    columns = [[] for _ in relevant]
    tested = 0
    for ell in good_primes(curve, bound=ell_bound):
        if jacobian_order(curve, ell) % q:
            continue
        G = jacobian_group(curve.f, ell)
        idx = [i for i, n in enumerate(G.invariants) if n % q == 0]
        for r, g in enumerate(relevant):
            vec = G.log(reduce_mod_p(g, curve, ell))
            columns[r] += [vec[i] % q for i in idx]
        tested += 1
        if _rank_mod_q(columns, q) == len(relevant):
            return "saturated"
        if tested >= max_primes:
            break
    return "unknown"


def _torsion_order(J, g, torsion) -> int:
    n, x = 1, g
    while x != J.identity:
        x = J.add(x, g)
        n += 1
        if n > len(torsion.elements):
            return 0
    return n


# --- division by q ----------------------------------------------------------------------


def rational_reconstruction(a: int, M: int) -> Fraction | None:
    """x/y = a mod M with |x|, y <= sqrt(M/2), or None."""
    a %= M
    bound = math.isqrt(M // 2)
    r0, r1, s0, s1 = M, a, 0, 1
    while r1 > bound:
        qt = r0 // r1
        r0, r1 = r1, r0 - qt * r1
        s0, s1 = s1, s0 - qt * s1
    if s1 == 0 or abs(s1) > bound or math.gcd(r1, abs(s1)) != 1:
        return None
    return Fraction(r1, s1)


def _coords(D) -> tuple | None:
    a, b, tag = D
    if len(a) != 3 or tag:
        return None
    b = tuple(b) + (0,) * (2 - len(b))
    return (a[0], a[1], b[0], b[1])


def _elementary(values, p) -> list[int]:
    e = [1]
    for v in values:
        e = [((e[i] if i < len(e) else 0) - v * (e[i - 1] if i else 0)) % p for i in range(len(e) + 1)]
    return e[1:]  # coefficients of prod (z - v) below the leading one, in order


def _rational_roots_of(coeffs) -> list[Fraction]:
    z = sympy.Symbol("z")
    poly = sympy.Poly([1] + [sympy.Rational(c.numerator, c.denominator) for c in coeffs], z, domain="QQ")
    return [Fraction(int(r.p), int(r.q)) for r in poly.ground_roots()]


def divide_point(curve: HyperCurve, D: MumfordPoint, q: int, torsion: TorsionResult,
                 max_prime: int = 1500):
    """(R, t) with q R + t = D in J(Q) for some t in T, or None.

    R is recovered from its reductions modulo many primes l by CRT and rational
    reconstruction. When T has q-torsion the reductions of R are only known
    up to T[q], so the symmetric functions of each coordinate over that orbit
    are reconstructed instead and R is read off from their rational roots.
    Every candidate is checked by exact arithmetic over Q.
    """
    J = jacobian_q(curve.f)
    tors = sorted(torsion.elements, key=repr)
    tq = [t for t in tors if J.scalar_mul(q, t) == J.identity]
    s = len(tq)
    r = valuation(s, q)
    for t in tors:
        target = J.sub(D, t)
        data, M = [[] for _ in range(4)], 1
        for ell in good_primes(curve, start=5, bound=max_prime):
            n = jacobian_order(curve, ell)
            if valuation(n, q) != r:
                continue
            Jl = jacobian_fp(curve.f, ell)
            try:
                y = reduce_mod_p(target, curve, ell)
                tl = [reduce_mod_p(x, curve, ell) for x in tq]
            except BadReduction:
                continue
            m = n // q**r
            c = pow(q, -1, m) * q**r * pow(q**r, -1, m) % (m * q**r) if m > 1 else 0
            x0 = Jl.scalar_mul(c, y)
            if Jl.scalar_mul(q, x0) != y:
                break  # target is not divisible by q mod l, so not over Q
            orbit = [_coords(Jl.add(x0, u)) for u in tl]
            if any(o is None for o in orbit):
                continue
            for i in range(4):
                data[i].append((ell, _elementary([o[i] for o in orbit], ell)))
            M *= ell
            if M.bit_length() < 64 or len(data[0]) % 3:
                continue
            R = _reconstruct(data, M, s, J, q, target)
            if R is not None:
                return R, t
    return None


def _reconstruct(data, M, s, J, q, target):
    options = []
    for i in range(4):
        sym = []
        for j in range(s):
            res = sympy.ntheory.modular.crt([ell for ell, _ in data[i]], [e[j] for _, e in data[i]])
            val = rational_reconstruction(int(res[0]), M)
            if val is None:
                return None
            sym.append(val)
        roots = _rational_roots_of(sym)
        if not roots:
            return None
        options.append(roots)
    for u0, u1, v0, v1 in product(*options):
        b = (v0, v1) if v1 else ((v0,) if v0 else ())
        R = MumfordPoint((u0, u1, Fraction(1)), b, 0)
        if J.is_valid(R) and J.scalar_mul(q, R) == target:
            return R
    return None
