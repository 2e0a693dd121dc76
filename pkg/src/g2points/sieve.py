"""Mordell-Weil sieve combined with a Chabauty injectivity prime.

Rational points Q map to phi(Q) = [Q - base] in J(Q). Under the working
hypothesis J(Q) = Z P + T (finite index, saturated at the relevant primes)
the quotient J(Q)/N J(Q) is modelled as pairs (k mod N, t) with t running
over the proved torsion subgroup T (N is always a multiple of exp(T)). A class
survives a prime p when the reduction of kP + t lies in the image of C(F_p)
plus N J(F_p).

Completeness: if N is a multiple of the exponent of the image of J(Q) in
J(F_p*) and C(Q) -> C(F_p*) is injective, then two points in the same class
coincide. So once every surviving class holds a known point, the known points
are all of C(Q).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .arith.factor import factor_integer
from .arith.padic import PrecisionError
from .chabauty import (
    DEFAULT_PRECISION,
    NotInKernel,
    RamifiedDisk,
    TorsionPointError,
    annihilating_differential,
    kernel_order,
    omega_nonvanishing,
    split_injectivity,
    vanishing_x,
)
from .curve import HyperCurve, Point, enumerate_points, iota, point_height, search_rational_points, sort_points
from .groups import (
    EnumerationCapExceeded,
    TorsionResult,
    good_primes,
    is_p_saturated,
    jacobian_group,
    jacobian_order,
)
from .jacobian import (
    MumfordPoint,
    _inf_point,
    _red,
    _v,
    embed_point,
    jacobian_fp,
    jacobian_q,
    reduce_mod_p,
)

log = logging.getLogger(__name__)

N_CAP = 2**4 * 3**3 * 5**2 * 7 * 11 * 13

DEFAULT_SIEVE_CONFIG = {
    "prime_bound": 120,
    "max_primes": 60,
    "primes_per_round": 5,
    "max_rounds": 60,
    "n_cap": N_CAP,
    "smooth_bound": 50,
    "injectivity_budget": 40,
    "split_after": 8,
    "kernel_cap": 300,
    "precision": DEFAULT_PRECISION,
    "search_height": 64,
    "max_search_height": 1024,
    "multiple_bound": 60,
    "prefer_smooth": 7,
    "injectivity_candidates": 6,
    "max_fallbacks": 4,
    "stall_escalations": 2,
}


class SieveError(RuntimeError):
    """Internal inconsistency: a known point was eliminated, or two known
    points share a class. Either indicates a violated hypothesis."""


# --- points and their images mod p ------------------------------------------------------


def reduce_point(Q: Point, curve: HyperCurve, p: int) -> Point:
    """Reduction of a rational point to C(F_p), with inf+/- labels taken
    relative to the square root of the leading coefficient fixed mod p."""
    Jq = jacobian_q(curve.f)
    Jp = jacobian_fp(curve.f, p)
    if Q.inf:
        if Q.inf == "inf" or Jp.deg == 5:
            return Point(inf="inf")
        label = Q.inf
        if _red(Jq.s, p) != Jp.s:
            label = "inf-" if label == "inf+" else "inf+"
        return Point(inf=label)
    x, y = Fraction(Q.x), Fraction(Q.y)
    if _v(x, p) >= 0:
        return Point(_red(x, p), _red(y, p))
    if Jp.deg == 5:
        return Point(inf="inf")
    return _inf_point(_red(y / x**3, p), Jp, p)


def phi(Q: Point, curve: HyperCurve, base: Point) -> MumfordPoint:
    return embed_point(Q, jacobian_q(curve.f), base)


def psi_images(curve: HyperCurve, p: int, base: Point) -> list[MumfordPoint]:
    """[x - base mod p] for every x in C(F_p)."""
    Jp = jacobian_fp(curve.f, p)
    b = iota(reduce_point(base, curve, p))
    return [Jp.from_effective([x, b]) for x in enumerate_points(curve, p)]


def base_point(curve: HyperCurve, points) -> Point | None:
    if curve.degree % 2:
        return Point(inf="inf")
    pts = sort_points(points)
    return pts[0] if pts else None


# --- sieve state ----------------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class CosetClass:
    k: int
    t: int  # index into the canonical torsion element list


def torsion_elements(torsion: TorsionResult) -> list[MumfordPoint]:
    return sorted(torsion.elements, key=repr)


def _quotient_moduli(invariants, N: int) -> tuple:
    return tuple(math.gcd(d, N) for d in invariants)


def _encode(vecs: np.ndarray, moduli) -> np.ndarray:
    code = np.zeros(vecs.shape[0], dtype=np.int64)
    for i, g in enumerate(moduli):
        code = code * g + vecs[:, i] % g
    return code


@dataclass
class PrimeAudit:
    p: int
    invariants: tuple
    generators: list  # generators of J(F_p) matching invariants
    image_P: tuple
    image_torsion: list
    curve_image: list  # sorted vectors of psi(C(F_p)) modulo N J(F_p)
    survivors: int

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "invariants": list(self.invariants),
            "generators": [g.to_json() for g in self.generators],
            "image_P": list(self.image_P),
            "image_torsion": [list(v) for v in self.image_torsion],
            "curve_image": [list(v) for v in self.curve_image],
            "survivors": self.survivors,
        }


@dataclass
class SieveState:
    N: int
    n_torsion: int
    alive: np.ndarray  # boolean mask over k * n_torsion + t
    S: list = field(default_factory=list)
    audits: list = field(default_factory=list)
    skipped: list = field(default_factory=list)

    @classmethod
    def initial(cls, N: int, n_torsion: int) -> "SieveState":
        return cls(N, n_torsion, np.ones(N * n_torsion, dtype=bool))

    def classes(self) -> list[CosetClass]:
        idx = np.nonzero(self.alive)[0]
        return [CosetClass(int(i) // self.n_torsion, int(i) % self.n_torsion) for i in idx]

    @property
    def count(self) -> int:
        return int(self.alive.sum())


def class_images(G, curve, P, tors, p):
    """dlog vectors of the reductions of P and of each torsion element."""
    Jp_P = reduce_mod_p(P, curve, p)
    vP = G.log(Jp_P)
    vT = [G.log(reduce_mod_p(t, curve, p)) for t in tors]
    return vP, vT


def surviving_mask(N, n_t, invariants, vP, vT, image_vecs) -> np.ndarray:
    """Boolean mask over (k, t) of classes whose image lies in the image set."""
    moduli = _quotient_moduli(invariants, N)
    if not moduli:
        return np.ones(N * n_t, dtype=bool)
    ks = np.repeat(np.arange(N, dtype=np.int64), n_t)
    ts = np.tile(np.arange(n_t, dtype=np.int64), N)
    P = np.array(vP, dtype=np.int64)
    T = np.array(vT, dtype=np.int64).reshape(n_t, len(moduli))
    vecs = (ks[:, None] * P[None, :] + T[ts]) % np.array(moduli, dtype=np.int64)[None, :]
    img = _encode(np.array(image_vecs, dtype=np.int64).reshape(-1, len(moduli)), moduli)
    return np.isin(_encode(vecs, moduli), img)


def sieve_at_prime(state: SieveState, p: int, curve: HyperCurve, P: MumfordPoint,
                   torsion: TorsionResult, base: Point) -> SieveState:
    """Intersect the surviving classes with the classes allowed at p."""
    if p == 2 or not curve.is_good_reduction(p):
        raise ValueError(f"p = {p} is not an odd prime of good reduction")
    try:
        G = jacobian_group(curve.f, p)
    except EnumerationCapExceeded as exc:
        state.skipped.append({"p": p, "reason": str(exc)})
        return state
    tors = torsion_elements(torsion)
    vP, vT = class_images(G, curve, P, tors, p)
    moduli = _quotient_moduli(G.invariants, state.N)
    image = sorted({tuple(c % g for c, g in zip(G.log(x), moduli)) for x in psi_images(curve, p, base)})
    mask = surviving_mask(state.N, len(tors), G.invariants, vP, vT, image)
    alive = state.alive & mask
    audit = PrimeAudit(p, G.invariants, list(G.generators), vP, vT, image, int(alive.sum()))
    return SieveState(state.N, state.n_torsion, alive, state.S + [p], state.audits + [audit], state.skipped)


# --- modulus ---------------------------------------------------------------------------------


def image_exponent(curve: HyperCurve, P: MumfordPoint, torsion: TorsionResult, p: int) -> int:
    """Exponent of the subgroup of J(F_p) generated by the reductions of P and T."""
    Jp = jacobian_fp(curve.f, p)
    n = jacobian_order(curve, p)
    fac = factor_integer(n)
    e = 1
    for g in [P] + list(torsion.generators):
        e = math.lcm(e, Jp.order_dividing(reduce_mod_p(g, curve, p), n, fac))
    return e


def torsion_exponent(torsion: TorsionResult) -> int:
    return torsion.invariants[-1] if torsion.invariants else 1


def choose_modulus(history: int, torsion: TorsionResult, exponents, smooth_bound: int = 50,
                   excluded=(), cap: int = N_CAP) -> int:
    """lcm of ``history`` (the previous N), exp(T) and the smooth, non-excluded
    parts of the given image exponents, kept under ``cap``."""
    N = math.lcm(history, torsion_exponent(torsion))
    for e in exponents:
        for ell, k in sorted(factor_integer(e).items()):
            if ell > smooth_bound or ell in excluded:
                continue
            cand = math.lcm(N, ell**k)
            if cand <= cap:
                N = cand
    return N


# --- injectivity -----------------------------------------------------------------------------


@dataclass
class Injectivity:
    p_star: int
    residual: tuple
    method: str  # "nonvanishing" or "split"
    vanishing_point: Point | None = None
    precision: int = 0
    m: int = 0
    saturation: dict = field(default_factory=dict)
    requested: int = DEFAULT_PRECISION

    def to_json(self) -> dict:
        out = {"p_star": self.p_star, "alpha_pair": list(self.residual), "method": self.method,
               "precision": self.precision, "requested_precision": self.requested, "kernel_multiple": self.m}
        if self.vanishing_point is not None:
            out["vanishing_point"] = self.vanishing_point.to_json()
        return out


def _point_vanishes(Q: Point, curve: HyperCurve, p: int, xi) -> bool:
    R = reduce_point(Q, curve, p)
    if xi is None:
        return bool(R.inf)
    return not R.inf and R.x == xi


def saturation_audit(curve, P, torsion, qs, cache: dict) -> dict:
    for q in sorted(qs):
        if q not in cache:
            cache[q] = is_p_saturated(curve, [P], q, torsion)
    return {q: cache[q] for q in qs}


def injectivity_candidates(curve: HyperCurve, P: MumfordPoint, torsion: TorsionResult, known,
                           budget: int = 40, split_after: int = 8, kernel_cap: int = 300,
                           precision: int = DEFAULT_PRECISION, sat_cache: dict | None = None,
                           notes: list | None = None):
    """Good primes p > 3 (at most ``budget`` of them, ascending) at which
    C(Q) -> C(F_p) is injective and every prime dividing #J(F_p) is a
    saturation prime."""
    sat_cache = {} if sat_cache is None else sat_cache
    notes = [] if notes is None else notes
    failures = []  # (p, xi) where the reduced differential vanishes on C(F_p)
    tried = 0
    for p in good_primes(curve, start=5, bound=2000):
        if tried >= budget:
            return
        tried += 1
        try:
            m = kernel_order(P, curve, p)
            if m > kernel_cap:
                notes.append(f"p={p}: kernel multiple {m} above cap")
                continue
            omega = annihilating_differential(P, curve, p, precision)
        except (RamifiedDisk, PrecisionError, NotInKernel) as exc:
            notes.append(f"p={p}: {type(exc).__name__}")
            continue
        res = omega.residual
        method, vpt = None, None
        if omega_nonvanishing(res, curve, p):
            method = "nonvanishing"
        else:
            failures.append((p, vanishing_x(res, p)))
            if len(failures) >= split_after:
                recent = failures[-split_after:]
                for Q in sort_points(known):
                    if all(_point_vanishes(Q, curve, q, xi) for q, xi in recent) and split_injectivity(Q, curve, p):
                        method, vpt = "split", Q
                        break
        if method is None:
            continue
        qs = set(factor_integer(jacobian_order(curve, p)))
        sat = saturation_audit(curve, P, torsion, qs, sat_cache)
        if any(v != "saturated" for v in sat.values()):
            notes.append(f"p={p}: saturation unknown at {sorted(q for q, v in sat.items() if v != 'saturated')}")
            continue
        yield Injectivity(p, tuple(res), method, vpt, omega.precision, omega.m, sat, precision)


def injectivity_certificate(curve, P, torsion, known, budget: int = 40, **kw) -> Injectivity | None:
    """The first injectivity prime within the budget, or None."""
    return next(injectivity_candidates(curve, P, torsion, known, budget, **kw), None)


def _largest_prime(n: int) -> int:
    return max(factor_integer(n), default=1)


def injectivity_options(curve, P, torsion, known, cfg, sat_cache, notes):
    """Injectivity primes paired with their modulus.  The first few are
    ranked by the largest prime factor of the image exponent (then by the
    exponent); later ones follow in order, as fallbacks."""
    gen = injectivity_candidates(curve, P, torsion, known, cfg["injectivity_budget"], cfg["split_after"],
                                 cfg["kernel_cap"], cfg["precision"], sat_cache, notes)
    batch = []
    for inj in gen:
        e = math.lcm(torsion_exponent(torsion), image_exponent(curve, P, torsion, inj.p_star))
        batch.append(((_largest_prime(e), e), inj, e))
        if batch[-1][0][0] <= cfg["prefer_smooth"] or len(batch) >= cfg["injectivity_candidates"]:
            break
    batch.sort(key=lambda b: (b[0], b[1].p_star))
    for _, inj, e in batch:
        yield inj, e
    for inj in gen:
        yield inj, math.lcm(torsion_exponent(torsion), image_exponent(curve, P, torsion, inj.p_star))


def choose_injectivity(curve, P, torsion, known, cfg, sat_cache, notes):
    for inj, N in injectivity_options(curve, P, torsion, known, cfg, sat_cache, notes):
        return inj, N
    return None, None


# --- witnesses -------------------------------------------------------------------------------


class MultipleTable:
    """Cache of kP over Q and modulo a reference prime."""

    def __init__(self, curve, P, p_ref):
        self.J = jacobian_q(curve.f)
        self.P = P
        self.curve = curve
        self.p_ref = p_ref
        self.Jp = jacobian_fp(curve.f, p_ref)
        self.Pp = reduce_mod_p(P, curve, p_ref)
        self.exact = {0: self.J.identity}

    def reduced(self, k: int):
        return self.Jp.scalar_mul(k, self.Pp)

    def multiple(self, k: int):
        if k not in self.exact:
            self.exact[k] = self.J.scalar_mul(k, self.P)
        return self.exact[k]


def find_multiple(D: MumfordPoint, tors, table: MultipleTable, bound: int):
    """(k, t_index) with D = kP + tors[t_index] exactly and |k| <= bound, or None."""
    J, Jp, curve, p = table.J, table.Jp, table.curve, table.p_ref
    Dp = reduce_mod_p(D, curve, p)
    tps = [reduce_mod_p(t, curve, p) for t in tors]
    for a in range(bound + 1):
        for k in ((a, -a) if a else (0,)):
            kp = table.reduced(k)
            for i, tp in enumerate(tps):
                if Jp.add(kp, tp) != Dp:
                    continue
                if J.add(table.multiple(k), tors[i]) == D:
                    return k, i
    return None


@dataclass
class Witness:
    cls: CosetClass
    point: Point
    multiple: int  # exact k with phi(point) = multiple * P + t

    def to_json(self, tors) -> dict:
        return {"class": {"k": self.cls.k, "t": tors[self.cls.t].to_json()},
                "point": self.point.to_json(), "multiple": self.multiple}


def assign_witnesses(points, curve, P, tors, base, N, table, bound) -> tuple[dict, list]:
    """Map class -> Witness for every known point whose exact multiple is found."""
    out, unresolved = {}, []
    for Q in sort_points(points):
        hit = find_multiple(phi(Q, curve, base), tors, table, bound)
        if hit is None:
            unresolved.append(Q)
            continue
        k, t = hit
        c = CosetClass(k % N, t)
        if c in out and out[c].point != Q:
            raise SieveError(f"points {out[c].point} and {Q} share the class {c}")
        out[c] = Witness(c, Q, k)
    return out, unresolved


# --- certificate ------------------------------------------------------------------------------


@dataclass
class Certificate:
    curve: HyperCurve
    P: MumfordPoint
    torsion: TorsionResult
    base: Point
    N: int
    S: list
    injectivity: Injectivity
    saturation: dict
    witnesses: list
    audits: list

    def to_json(self) -> dict:
        tors = torsion_elements(self.torsion)
        return {
            "assumption": "finite-index",
            "curve": self.curve.to_json(),
            "generator": self.P.to_json(),
            "base_point": self.base.to_json(),
            "torsion": {"elements": [t.to_json() for t in tors], "rigor": "proved" if self.torsion.proved else "lower-bound-only"},
            "N": self.N,
            "S": list(self.S),
            "injectivity": self.injectivity.to_json(),
            "saturation": [{"q": q, "verdict": v} for q, v in sorted(self.saturation.items())],
            "witnesses": [w.to_json(tors) for w in sorted(self.witnesses, key=lambda w: w.cls)],
            "audits": [a.to_json() for a in self.audits],
        }


@dataclass
class SieveResult:
    status: str  # "complete" or "inconclusive"
    points: list
    certificate: Certificate | None
    notes: list
    state: SieveState | None = None


def _exponent_table(curve, P, torsion, bound) -> dict:
    """Image exponent of <P, T> in J(F_p) for the good primes p <= bound."""
    return {p: image_exponent(curve, P, torsion, p) for p in good_primes(curve, bound=bound)}


def order_primes(exps: dict, N: int, exclude=()) -> list[int]:
    """Information-bearing primes for N: first those whose image exponent
    divides N, then the others sharing a factor with N, each group ascending."""
    full = [p for p, e in exps.items() if N % e == 0 and p not in exclude]
    part = [p for p, e in exps.items() if N % e and math.gcd(e, N) > 1 and p not in exclude]
    return sorted(full) + sorted(part)


def run_sieve(curve: HyperCurve, P: MumfordPoint, torsion: TorsionResult, config: dict | None = None,
              known_points=None) -> SieveResult:
    cfg = dict(DEFAULT_SIEVE_CONFIG)
    cfg.update(config or {})
    notes = []
    if not torsion.proved:
        raise ValueError("torsion subgroup is not proved")
    ctx = {"height": cfg["search_height"], "bound": cfg["multiple_bound"], "rounds": 0}
    known = set(known_points or []) | set(search_rational_points(curve, ctx["height"]))
    base = base_point(curve, known)
    if base is None:
        return SieveResult("inconclusive", [], None, ["no rational base point found"])
    sat_cache = {}
    exps = _exponent_table(curve, P, torsion, cfg["prime_bound"])
    state = None
    tried = 0
    for inj, N in injectivity_options(curve, P, torsion, known, cfg, sat_cache, notes):
        if tried >= cfg["max_fallbacks"] or ctx["rounds"] >= cfg["max_rounds"]:
            break
        tried += 1
        if N > cfg["n_cap"]:
            notes.append(f"modulus {N} required at p*={inj.p_star} exceeds the cap")
            continue
        res, state = _sieve_from(curve, P, torsion, inj, N, base, known, exps, cfg, ctx, sat_cache, notes)
        if res is not None:
            return res
        notes.append(f"sieve stalled at p*={inj.p_star}")
    if not tried:
        notes.append("no injectivity prime within budget")
        return SieveResult("inconclusive", sort_points(known), None, notes)
    notes.append("sieve caps reached with unwitnessed classes")
    return SieveResult("inconclusive", sort_points(known), None, notes, state)


def _sieve_from(curve, P, torsion, inj, N, base, known, exps, cfg, ctx, sat_cache, notes):
    """Sieve with a fixed injectivity prime.  Returns (result, state); the
    result is None when the unwitnessed survivors stop shrinking over
    ``stall_escalations`` increases of N, or the round budget runs out."""
    p_star = inj.p_star
    tors = torsion_elements(torsion)
    excluded = set()
    table = MultipleTable(curve, P, p_star)
    state = None
    best, stall = None, 0
    while ctx["rounds"] < cfg["max_rounds"]:
        ctx["rounds"] += 1
        order = [p_star] + order_primes(exps, N, exclude=(p_star,))
        order = order[: cfg["max_primes"]]
        if state is None or state.N != N:
            state = SieveState.initial(N, len(tors))
        todo = [p for p in order if p not in state.S][: cfg["primes_per_round"]]
        for p in todo:
            state = sieve_at_prime(state, p, curve, P, torsion, base)
        witnesses, unresolved = assign_witnesses(known, curve, P, tors, base, N, table, ctx["bound"])
        alive = set(state.classes())
        lost = [w for c, w in witnesses.items() if c not in alive]
        if lost:
            raise SieveError(f"known point {lost[0].point} eliminated by the sieve")
        log.info("p*=%d N=%d |S|=%d survivors=%d witnessed=%d", p_star, N, len(state.S), len(alive), len(witnesses))
        if alive <= set(witnesses):
            if unresolved:
                notes.append(f"{len(unresolved)} known points without an exact multiple")
            sat = dict(inj.saturation)
            sat.update(saturation_audit(curve, P, torsion, set(factor_integer(N)), sat_cache))
            if any(v != "saturated" for v in sat.values()):
                notes.append("saturation unknown at a prime dividing N")
                return SieveResult("inconclusive", sort_points(known), None, notes, state), state
            wl = [witnesses[c] for c in sorted(alive)]
            cert = Certificate(curve, P, torsion, base, N, list(state.S), inj, sat, wl, state.audits)
            return SieveResult("complete", sort_points(w.point for w in wl), cert, notes, state), state
        # escalate: a deeper search, then more primes, then a larger modulus
        ctx["height"] = min(2 * ctx["height"], cfg["max_search_height"])
        known |= set(search_rational_points(curve, ctx["height"]))
        ctx["bound"] = 2 * ctx["bound"]
        if not todo or all(p in state.S for p in order):
            open_ = len(alive - set(witnesses))
            if best is None or open_ < best:
                best, stall = open_, 0
            else:
                stall += 1
                if stall >= cfg["stall_escalations"]:
                    return None, state
            N2 = _escalate_modulus(curve, P, torsion, N, exps, cfg, excluded, sat_cache)
            if N2 == N and not todo:
                return None, state
            N = N2
    return None, state


def _escalate_modulus(curve, P, torsion, N, exps, cfg, excluded, sat_cache) -> int:
    """Multiply N by one prime power, chosen so that as many further primes
    as possible have their image exponent dividing the new modulus; primes
    whose saturation cannot be shown are excised."""
    def full(M):
        return sum(1 for e in exps.values() if M % e == 0)

    base_count = full(N)
    options = {}
    for e in exps.values():
        for ell, k in factor_integer(e).items():
            if ell > cfg["smooth_bound"] or ell in excluded:
                continue
            cur = valuation_of(N, ell)
            if k > cur:
                M = math.lcm(N, ell**k)
                if M <= cfg["n_cap"]:
                    options[M] = options.get(M, 0) + 1
    ranked = sorted(options, key=lambda M: (-(full(M) - base_count) / math.log(M / N), -options[M], M))
    for M in ranked:
        new = [ell for ell in factor_integer(M) if N % ell]
        if any(saturation_audit(curve, P, torsion, {ell}, sat_cache)[ell] != "saturated" for ell in new):
            excluded.update(ell for ell in new if sat_cache[ell] != "saturated")
            continue
        return M
    return N


def valuation_of(n: int, ell: int) -> int:
    k = 0
    while n % ell == 0:
        n //= ell
        k += 1
    return k
