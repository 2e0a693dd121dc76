"""Command line front end; every command reads and writes JSON.

Exit codes: 0 answer produced (including inconclusive), 2 bad input,
3 budget exceeded.  Failures are reported as a JSON object on stdout.
"""

from __future__ import annotations

import argparse
import json
import sys

from .arith.factor import FactorizationBudgetExceeded
from .arith.padic import PrecisionError
from .certify import CertificateError, verify_certificate
from .chabauty import NotInKernel, RamifiedDisk, TorsionPointError, annihilating_differential, omega_nonvanishing
from .curve import BadReduction, HyperCurve
from .groups import EnumerationCapExceeded, jacobian_group, jacobian_order, torsion_subgroup
from .jacobian import JacobianError
from .localsolve import is_els
from .pipeline import InputError, determine_rational_points, parse_input

EXIT_OK, EXIT_INPUT, EXIT_BUDGET = 0, 2, 3


class UsageError(ValueError):
    pass


def _load(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from exc


def _curve(path) -> HyperCurve:
    data = _load(path)
    f = data["f"] if isinstance(data, dict) else data
    try:
        return HyperCurve(f)
    except (TypeError, ValueError, KeyError) as exc:
        raise UsageError(f"bad curve: {exc}") from exc


def cmd_locsolv(args):
    curve = _curve(args.curve)
    ok, reports = is_els(curve.f)
    return {"els": ok, "places": [r.to_json() for r in reports]}


def cmd_jacobian_info(args):
    curve = _curve(args.curve)
    p = args.prime
    if not curve.is_good_reduction(p):
        raise UsageError(f"{p} is a bad prime for this curve")
    out = {"p": p, "order": jacobian_order(curve, p)}
    if args.structure:
        G = jacobian_group(curve.f, p)
        out["invariants"] = list(G.invariants)
        out["generators"] = [g.to_json() for g in G.generators]
    return out


def cmd_torsion(args):
    curve = _curve(args.curve)
    T = torsion_subgroup(curve)
    out = T.to_json()
    out["elements"] = [t.to_json() for t in sorted(T.elements, key=repr)]
    return out


def cmd_chabauty(args):
    curve, P = parse_input(_curve(args.curve).f, _load(args.point))
    omega = annihilating_differential(P, curve, args.prime, args.precision)
    out = omega.to_json()
    out["nonvanishing"] = omega_nonvanishing(omega.residual, curve, args.prime)
    return out


def cmd_points(args):
    config = _load(args.config) if args.config else None
    res = determine_rational_points(_curve(args.curve).f, _load(args.point), config)
    text = res.dumps()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    return res.to_json()


def cmd_verify(args):
    data = _load(args.certificate)
    cert = data.get("certificate", data) if isinstance(data, dict) else data
    if cert is None:
        if data.get("status") == "empty-proven":
            return {"valid": True, "checks": ["empty-proven results carry no certificate"]}
        raise UsageError("no certificate in this file")
    try:
        checks = verify_certificate(cert)
    except CertificateError as exc:
        return {"valid": False, "error": str(exc)}
    return {"valid": True, "checks": checks}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="g2points", description="Rational points on genus-2 curves.")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("locsolv", help="everywhere local solvability")
    s.add_argument("--curve", required=True)
    s.set_defaults(func=cmd_locsolv)

    s = sub.add_parser("jacobian-info", help="#J(F_p) and optionally its group structure")
    s.add_argument("--curve", required=True)
    s.add_argument("--prime", type=int, required=True)
    s.add_argument("--structure", action="store_true")
    s.set_defaults(func=cmd_jacobian_info)

    s = sub.add_parser("torsion", help="rational torsion subgroup")
    s.add_argument("--curve", required=True)
    s.set_defaults(func=cmd_torsion)

    s = sub.add_parser("chabauty", help="annihilating differential at a prime")
    s.add_argument("--curve", required=True)
    s.add_argument("--point", required=True)
    s.add_argument("--prime", type=int, required=True)
    s.add_argument("--precision", type=int, default=6)
    s.set_defaults(func=cmd_chabauty)

    s = sub.add_parser("points", help="determine C(Q)")
    s.add_argument("--curve", required=True)
    s.add_argument("--point", required=True)
    s.add_argument("--config")
    s.add_argument("--out")
    s.set_defaults(func=cmd_points)

    s = sub.add_parser("verify-certificate", help="replay a certificate or a points result")
    s.add_argument("certificate")
    s.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    code = EXIT_OK
    try:
        out = args.func(args)
        if args.command == "verify-certificate" and not out["valid"]:
            code = 1
    except (UsageError, InputError, JacobianError, BadReduction) as exc:
        out, code = {"error": "bad-input", "message": str(exc)}, EXIT_INPUT
    except (EnumerationCapExceeded, FactorizationBudgetExceeded, PrecisionError) as exc:
        out, code = {"error": "budget-exceeded", "message": str(exc)}, EXIT_BUDGET
    except (NotInKernel, RamifiedDisk, TorsionPointError) as exc:
        out, code = {"error": type(exc).__name__, "message": str(exc)}, EXIT_INPUT
    json.dump(out, sys.stdout, sort_keys=True, indent=1)
    sys.stdout.write("\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
