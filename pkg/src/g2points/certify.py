"""Replay of sieve certificates from their JSON form.

The checks avoid the sieve's own data structures: the group J(F_p) is
rebuilt by spanning the claimed generators (which also proves they generate a
group of the right order), the surviving classes are recomputed by plain
loops, and every witness is re-embedded with exact arithmetic over Q.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from itertools import product

from .chabauty import annihilating_differential, omega_nonvanishing, rank0_points, split_injectivity, vanishing_x
from .curve import HyperCurve, Point, enumerate_points, iota
from .groups import is_p_saturated, jacobian_order, torsion_subgroup
from .jacobian import JacobianError, MumfordPoint, embed_point, jacobian_fp, jacobian_q, reduce_mod_p
from .arith.factor import factor_integer, is_probable_prime

SPAN_LIMIT = 10**6


class CertificateError(ValueError):
    pass


def _fail(msg):
    raise CertificateError(msg)


def _mumford(data) -> MumfordPoint:
    D = MumfordPoint.from_json(data)
    return D


def _mumford_fp(data) -> MumfordPoint:
    D = MumfordPoint.from_json(data)
    if any(x.denominator != 1 for x in D.a + D.b):
        _fail("non-integral class over F_p")
    return MumfordPoint(tuple(int(x) for x in D.a), tuple(int(x) for x in D.b), D.tag)


def _point(data) -> Point:
    return Point.from_json(data)


def _fp_point(Q: Point, curve: HyperCurve, p: int) -> Point:
    """Reduction of a rational point, written independently of the sieve."""
    Jp = jacobian_fp(curve.f, p)
    if Q.inf:
        if curve.degree == 5:
            return Q
        # inf+ is the branch y/x^3 -> sqrt(lc) in Q; compare with the root fixed mod p
        s = math.isqrt(curve.lc)
        sign = 1 if Q.inf == "inf+" else -1
        return Point(inf="inf+" if (sign * s) % p == Jp.s else "inf-")
    x, y = Fraction(Q.x), Fraction(Q.y)
    if x.denominator % p:
        return Point(x.numerator * pow(x.denominator, -1, p) % p, y.numerator * pow(y.denominator, -1, p) % p)
    if curve.degree == 5:
        return Point(inf="inf")
    w = y / x**3
    val = w.numerator * pow(w.denominator, -1, p) % p
    return Point(inf="inf+" if val == Jp.s else "inf-")


def _span(Jp, gens, invariants):
    """dlog table of the group generated by ``gens`` with the claimed orders,
    failing unless the span has exactly prod(invariants) elements."""
    total = math.prod(invariants)
    if total > SPAN_LIMIT:
        _fail("group too large to replay")
    table = {Jp.identity: ()}
    for g, d in zip(gens, invariants):
        if Jp.scalar_mul(d, g) != Jp.identity:
            _fail(f"generator order does not divide {d}")
        new = {}
        for h, vec in table.items():
            x = h
            for c in range(d):
                if x in new:
                    _fail("claimed generators are dependent")
                new[x] = vec + (c,)
                x = Jp.add(x, g)
        table = new
    if len(table) != total:
        _fail("span has the wrong size")
    return table


@lru_cache(maxsize=64)
def _fresh_torsion(f):
    return torsion_subgroup(HyperCurve(f))


@lru_cache(maxsize=256)
def _fresh_saturation(f, P, q):
    return is_p_saturated(HyperCurve(f), [P], q, _fresh_torsion(f))


def _check_torsion(cert, curve, J):
    tors = [_mumford(t) for t in cert["torsion"]["elements"]]
    for t in tors:
        J.check(t)
    fresh = _fresh_torsion(curve.f)
    if set(fresh.elements) != set(tors):
        _fail("torsion elements differ from a fresh computation")
    proved = cert["torsion"]["rigor"] == "proved"
    if proved != fresh.proved:
        _fail("torsion rigor flag does not match")
    return tors, proved


def verify_certificate(cert: dict) -> list[str]:
    """Replay every field; returns the list of checks performed and raises
    CertificateError on the first failure."""
    done = []
    try:
        return _verify(cert, done)
    except CertificateError:
        raise
    except (KeyError, TypeError, ValueError, ZeroDivisionError, JacobianError) as exc:
        raise CertificateError(f"malformed certificate: {type(exc).__name__}: {exc}") from exc


def _verify(cert, done):
    if cert.get("assumption") != "finite-index":
        _fail("missing finite-index assumption")
    curve = HyperCurve(cert["curve"]["f"])
    J = jacobian_q(curve.f)
    P = _mumford(cert["generator"])
    J.check(P)
    tors, proved = _check_torsion(cert, curve, J)
    done.append("torsion")
    if cert.get("kind") == "rank0":
        if not proved:
            _fail("rank-0 claim needs proved torsion")
        if J.scalar_mul(len(tors), P) != J.identity:
            _fail("generator is not torsion")
        pts = sorted(str(_point(q)) for q in cert["points"])
        again = sorted(str(q) for q in rank0_points(curve, _fresh_torsion(curve.f)))
        if pts != again:
            _fail("rank-0 point set differs")
        done.append("rank0")
        return done

    N = int(cert["N"])
    if N <= 0 or any(J.scalar_mul(N, t) != J.identity for t in tors):
        _fail("N is not a multiple of the torsion exponent")
    base = _point(cert["base_point"])
    if not curve.contains(base):
        _fail("base point is not on the curve")

    inj = cert["injectivity"]
    ps = int(inj["p_star"])
    if ps <= 3 or not is_probable_prime(ps) or not curve.is_good_reduction(ps):
        _fail("p_star is not a good prime > 3")
    res = tuple(int(c) for c in inj["alpha_pair"])
    omega = annihilating_differential(P, curve, ps, int(inj["requested_precision"]))
    if tuple(omega.residual) != res:
        _fail("annihilating differential residual does not replay")
    if int(inj["kernel_multiple"]) != omega.m or int(inj["precision"]) != omega.precision:
        _fail("differential metadata does not replay")
    if inj["method"] == "nonvanishing":
        if not omega_nonvanishing(res, curve, ps):
            _fail("reduced differential vanishes on C(F_p*)")
        if "vanishing_point" in inj:
            _fail("unexpected vanishing point")
    elif inj["method"] == "split":
        Q = _point(inj["vanishing_point"])
        if not curve.contains(Q):
            _fail("vanishing point is not on the curve")
        Qb = _fp_point(Q, curve, ps)
        xi = vanishing_x(res, ps)
        if (xi is None) != bool(Qb.inf) or (xi is not None and Qb.x != xi):
            _fail("differential does not vanish at the stated point")
        if not split_injectivity(Q, curve, ps):
            _fail("split injectivity criterion fails")
    else:
        _fail("unknown injectivity method")
    Jps = jacobian_fp(curve.f, ps)
    for g in [P] + tors:
        if Jps.scalar_mul(N, reduce_mod_p(g, curve, ps)) != Jps.identity:
            _fail("N is not a multiple of the image exponent at p_star")
    done.append("injectivity")

    sat = {int(e["q"]): e["verdict"] for e in cert["saturation"]}
    need = set(factor_integer(N)) | set(factor_integer(jacobian_order(curve, ps)))
    if not need <= set(sat):
        _fail("saturation audit misses a required prime")
    for q, v in sat.items():
        if v != "saturated" or _fresh_saturation(curve.f, P, q) != "saturated":
            _fail(f"saturation at {q} does not replay")
    done.append("saturation")

    S = [int(p) for p in cert["S"]]
    audits = cert["audits"]
    if len(set(S)) != len(S) or ps not in S or len(audits) != len(S):
        _fail("prime set and audits do not match")
    survivors = set(product(range(N), range(len(tors))))
    for p, audit in zip(S, audits):
        if int(audit["p"]) != p or p == 2 or not curve.is_good_reduction(p):
            _fail(f"bad sieve prime {p}")
        survivors = _replay_prime(audit, p, curve, P, tors, base, N, survivors)
    done.append("sieve")

    wit = cert["witnesses"]
    classes = {}
    for w in wit:
        t = _mumford(w["class"]["t"])
        if t not in tors:
            _fail("witness torsion component is not torsion")
        c = (int(w["class"]["k"]), tors.index(t))
        Q = _point(w["point"])
        if not curve.contains(Q):
            _fail("witness is not on the curve")
        k = int(w["multiple"])
        if k % N != c[0]:
            _fail("witness multiple is not in its class")
        if J.add(J.scalar_mul(k, P), t) != embed_point(Q, J, base):
            _fail("witness does not embed into its class")
        if c in classes:
            _fail("two witnesses for one class")
        classes[c] = Q
    if set(classes) != survivors:
        _fail("witnessed classes differ from the surviving classes")
    if len(set(classes.values())) != len(classes):
        _fail("a point witnesses two classes")
    done.append("witnesses")
    return done


def _replay_prime(audit, p, curve, P, tors, base, N, survivors):
    Jp = jacobian_fp(curve.f, p)
    inv = tuple(int(d) for d in audit["invariants"])
    if math.prod(inv) != jacobian_order(curve, p):
        _fail(f"invariants at {p} do not multiply to #J(F_p)")
    gens = [_mumford_fp(g) for g in audit["generators"]]
    for g in gens:
        Jp.check(g)
    table = _span(Jp, gens, inv)
    vP = table[reduce_mod_p(P, curve, p)]
    vT = [table[reduce_mod_p(t, curve, p)] for t in tors]
    if list(vP) != list(audit["image_P"]) or [list(v) for v in vT] != audit["image_torsion"]:
        _fail(f"generator images at {p} do not replay")
    mods = [math.gcd(d, N) for d in inv]
    bb = iota(_fp_point(base, curve, p))
    image = {tuple(c % m for c, m in zip(table[Jp.from_effective([x, bb])], mods)) for x in enumerate_points(curve, p)}
    if sorted(image) != [tuple(v) for v in audit["curve_image"]]:
        _fail(f"image of C(F_p) at {p} does not replay")
    keep = set()
    for k, i in survivors:
        vec = tuple((k * a + b) % m for a, b, m in zip(vP, vT[i], mods))
        if vec in image:
            keep.add((k, i))
    if len(keep) != int(audit["survivors"]):
        _fail(f"survivor count at {p} does not replay")
    return keep
