"""End-to-end determination of C(Q) for a genus-2 curve and a generator P of
a finite-index subgroup of J(Q)."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

from .certify import CertificateError, verify_certificate
from .chabauty import rank0_points
from .curve import HyperCurve, Point, search_rational_points, sort_points
from .groups import mumford_search, torsion_subgroup
from .jacobian import JacobianError, MumfordPoint, difference_embed, embed_point, jacobian_q
from .localsolve import is_els
from .sieve import DEFAULT_SIEVE_CONFIG, SieveError, run_sieve

log = logging.getLogger(__name__)

STATUSES = ("empty-proven", "complete-with-certificate", "conditional", "inconclusive")

DEFAULT_CONFIG = {
    "search_height": 1000,
    "refute_point_height": 64,
    "refute_mumford_height": 3,
    "torsion_primes": 8,
    "sieve": {},
}


class InputError(ValueError):
    pass


@dataclass
class PipelineResult:
    status: str
    points: list
    certificate: dict | None = None
    notes: list = field(default_factory=list)
    generator: MumfordPoint | None = None

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "points": [q.to_json() for q in sort_points(self.points)],
            "generator": self.generator.to_json() if self.generator is not None else None,
            "certificate": self.certificate,
            "notes": list(self.notes),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=1)


def merged_config(config: dict | None) -> dict:
    cfg = json.loads(json.dumps(DEFAULT_CONFIG))
    for k, v in (config or {}).items():
        if k not in cfg:
            raise InputError(f"unknown config key {k!r}")
        if k == "sieve":
            bad = set(v) - set(DEFAULT_SIEVE_CONFIG)
            if bad:
                raise InputError(f"unknown sieve config keys {sorted(bad)}")
            cfg[k].update(v)
        else:
            cfg[k] = v
    return cfg


def parse_input(f, P) -> tuple[HyperCurve, MumfordPoint]:
    try:
        curve = HyperCurve(f)
    except (TypeError, ValueError) as exc:
        raise InputError(f"bad curve: {exc}") from exc
    if curve.degree not in (5, 6):
        raise InputError("f must have degree 5 or 6")
    if isinstance(P, dict):
        try:
            P = MumfordPoint.from_json(P)
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
            raise InputError(f"bad point: {exc}") from exc
    try:
        jacobian_q(curve.f).check(P)
    except (JacobianError, TypeError, ValueError) as exc:
        raise InputError(f"P is not on the Jacobian: {exc}") from exc
    return curve, P


def non_torsion_class(curve: HyperCurve, torsion, cfg) -> MumfordPoint | None:
    """A rational class outside the (proved) torsion subgroup, from small
    point differences and small Mumford pairs; the first in canonical order."""
    J = jacobian_q(curve.f)
    tors = set(torsion.elements)
    pts = sort_points(search_rational_points(curve, cfg["refute_point_height"]))
    cands = []
    for Q in pts:
        cands.append(difference_embed(Q, J))
        for R in pts:
            if R != Q:
                cands.append(embed_point(Q, J, R))
    cands += mumford_search(curve, cfg["refute_mumford_height"])
    for D in cands:
        if J.is_valid(D) and D not in tors:
            return D
    return None


def _rank0_certificate(curve, P, torsion, points) -> dict:
    return {
        "kind": "rank0",
        "assumption": "finite-index",
        "curve": curve.to_json(),
        "generator": P.to_json(),
        "torsion": {"elements": [t.to_json() for t in sorted(torsion.elements, key=repr)], "rigor": "proved"},
        "points": [q.to_json() for q in points],
    }


def determine_rational_points(f, P, config: dict | None = None) -> PipelineResult:
    cfg = merged_config(config)
    curve, P = parse_input(f, P)
    notes = []

    ok, reports = is_els(curve.f)
    if not ok:
        bad = [r for r in reports if not r.solvable][0]
        notes.append(f"els: no points over {'R' if bad.place == 'real' else 'Q_' + str(bad.place)} ({bad.method})")
        return PipelineResult("empty-proven", [], None, notes, P)
    notes.append("els: locally soluble everywhere")

    torsion = torsion_subgroup(curve, n_primes=cfg["torsion_primes"])
    notes.append(f"torsion: invariants {list(torsion.invariants)}, {'proved' if torsion.proved else 'lower bound only'}")

    J = jacobian_q(curve.f)
    if J.scalar_mul(torsion.bound, P) == J.identity:
        if not torsion.proved:
            pts = search_rational_points(curve, cfg["search_height"])
            notes.append("P is torsion but the torsion subgroup is not proved; points found by search only")
            return PipelineResult("conditional", pts, None, notes, P)
        D = non_torsion_class(curve, torsion, cfg)
        if D is None:
            pts = rank0_points(curve, torsion)
            cert = _rank0_certificate(curve, P, torsion, pts)
            verify_certificate(json.loads(json.dumps(cert)))
            notes.append("rank 0: C(Q) pulled back from the torsion subgroup")
            return PipelineResult("complete-with-certificate", pts, cert, notes, P)
        notes.append(f"P is torsion but J(Q) has the non-torsion class {D.to_json()}; using it as the generator")
        P = D

    pts = search_rational_points(curve, cfg["search_height"])
    if not pts:
        notes.append("no rational point found; odd-degree divisor step not implemented, so emptiness is not claimed")
        return PipelineResult("inconclusive", [], None, notes, P)
    if not torsion.proved:
        notes.append("torsion subgroup only bounded; the sieve is not run and completeness is not claimed")
        return PipelineResult("conditional", pts, None, notes, P)

    try:
        res = run_sieve(curve, P, torsion, cfg["sieve"], known_points=pts)
    except SieveError as exc:
        notes.append(f"sieve: {exc}")
        return PipelineResult("inconclusive", pts, None, notes, P)
    notes += [f"sieve: {n}" for n in res.notes]
    if res.status != "complete":
        return PipelineResult("inconclusive", sort_points(set(pts) | set(res.points)), None, notes, P)
    cert = json.loads(json.dumps(res.certificate.to_json()))
    try:
        verify_certificate(cert)
    except CertificateError as exc:
        notes.append(f"certificate replay failed: {exc}")
        return PipelineResult("inconclusive", res.points, None, notes, P)
    notes.append(f"sieve: complete with N={cert['N']} and p*={cert['injectivity']['p_star']}; certificate replayed")
    missing = set(pts) - set(res.points)
    if missing:
        # cannot happen for a valid certificate: every searched point has a witness class
        raise SieveError(f"searched point {sort_points(missing)[0]} missing from the certified set")
    return PipelineResult("complete-with-certificate", res.points, cert, notes, P)
