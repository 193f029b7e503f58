"""Command-line interface.

Exit codes: 0 success (or a positive verdict), 1 a computed negative verdict,
2 usage or input error, 3 numerical failure.
"""

import argparse
import sys

import numpy as np

from . import bounds, compat, io, povm, scan, spectra, witness
from .errors import NumericalError, ValidationError

EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2, 3


def _int_list(text):
    try:
        values = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _float_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _write(text, out):
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def load_set(path):
    """A measurement set from JSON; a lone POVM document becomes a one-element set."""
    data = io.read_json(path)
    if isinstance(data, dict) and "povms" in data:
        return povm.MeasurementSet.from_json(data)
    if isinstance(data, dict) and "effects" in data:
        return povm.MeasurementSet((povm.Povm.from_json(data),))
    raise io.DecodeError("$", "expected a POVM ({dim, effects}) or a set ({dim, povms})")


# ----------------------------------------------------------------------
# Commands


def cmd_validate(args):
    mset = load_set(args.file)
    report = mset.validate(args.tol)
    print(report)
    return EXIT_OK if report.ok else EXIT_NEGATIVE


def cmd_compat_check(args):
    mset = povm.require_valid(load_set(args.file))
    verdict = compat.joint_feasibility(mset, tol=args.tol)
    if args.json or args.emit_joint:
        print(compat.verdict_dumps(verdict, emit_joint=args.emit_joint))
    else:
        word = "compatible" if verdict.compatible else "incompatible"
        print(f"{word} (margin {verdict.margin:.6g})")
    return EXIT_OK if verdict.compatible else EXIT_NEGATIVE


def cmd_compat_robustness(args):
    mset = povm.require_valid(load_set(args.file))
    res = compat.robustness(mset, args.model, args.direction)
    if args.json:
        print(io.dumps(res.to_json()))
    else:
        print(f"t* = {res.t:.5f}")
        print("s  = (" + ", ".join(f"{s:.5f}" for s in res.weights) + ")")
    return EXIT_OK


def cmd_zhu(args):
    mset = povm.require_valid(load_set(args.file))
    res = compat.zhu_check(mset)
    if args.json:
        print(io.dumps(res.to_json()))
    else:
        print(f"min tr H = {res.value:.6f}")
        print(f"1 + value = {1 + res.value:.6f}, dimension = {res.dim}")
        print("incompatible (certified)" if res.incompatible_certified else "no certificate")
    return EXIT_NEGATIVE if res.incompatible_certified else EXIT_OK


def cmd_witness_check(args):
    X = witness.WitnessCandidate.from_json(io.read_json(args.file))
    out = {}
    positive = None
    if args.method in ("exact", "both"):
        slack = witness.exact_slack(X)
        out["exact"] = {"witness": bool(slack >= -witness.EXACT_TOL), "slack": slack}
        positive = out["exact"]["witness"]
    if args.method in ("sdp", "both"):
        cls = witness.classify(X, args.theta)
        out["sdp"] = cls.to_json()
        if positive is None:
            positive = cls.verdict is witness.Verdict.WITNESS
    if args.json:
        print(io.dumps(out))
    else:
        if "exact" in out:
            e = out["exact"]
            print(f"exact: {'witness' if e['witness'] else 'not a witness'} (slack {e['slack']:.6g})")
        if "sdp" in out:
            s = out["sdp"]
            print(f"sdp: {s['verdict']} (rho {s['rho']:.6g}, theta {s['theta_used']:.6g})")
    return EXIT_OK if positive else EXIT_NEGATIVE


def cmd_witness_apply(args):
    X = witness.WitnessCandidate.from_json(io.read_json(args.witness))
    mset = povm.require_valid(load_set(args.set))
    res = witness.apply_witness(X, mset)
    if args.json:
        print(io.dumps(res.to_json()))
    else:
        print(f"max eigenvalue = {res.max_eig:.10g}")
        print("incompatible (certified)" if res.certified_incompatible else "no certificate")
    return EXIT_NEGATIVE if res.certified_incompatible else EXIT_OK


def cmd_bounds(args):
    rep = bounds.report(args.g, args.d, args.k)
    if args.json:
        print(rep.dumps())
    else:
        sys.stdout.write(rep.table())
    return EXIT_OK


def cmd_region_scan(args):
    mset = povm.require_valid(load_set(args.file))
    if args.directions < 1:
        raise ValidationError("--directions must be at least 1")
    result = scan.region_scan(mset, args.model, args.directions, args.seed)
    _write(result.to_csv(), args.out)
    return EXIT_OK


def cmd_jewel_vertices(args):
    _write(spectra.vertices_csv(spectra.jewel_vertices(args.k)), args.out)
    return EXIT_OK


def cmd_cuboid_vertices(args):
    _write(spectra.vertices_csv(spectra.cuboid_vertices(args.k)), args.out)
    return EXIT_OK


def cmd_mub(args):
    mset = povm.mub_povms(args.d, args.count)
    _write(io.dumps(mset.to_json()) + "\n", args.out)
    return EXIT_OK


def cmd_gen_random(args):
    k = args.k if len(args.k) > 1 else args.k * args.g
    if len(k) != args.g:
        raise ValidationError(f"--k lists {len(k)} outcome counts for --g {args.g}")
    mset = povm.random_set(args.d, k, args.seed)
    _write(io.dumps(mset.to_json()) + "\n", args.out)
    print(f"# seed={args.seed}", file=sys.stderr)
    return EXIT_OK


# ----------------------------------------------------------------------
# Parser


def build_parser():
    p = argparse.ArgumentParser(prog="jewel", description="Joint measurability and free spectrahedra.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", help="validate a POVM or measurement set")
    s.add_argument("file")
    s.add_argument("--tol", type=float, default=povm.VALIDATION_TOL)
    s.set_defaults(func=cmd_validate)

    c = sub.add_parser("compat", help="joint measurability").add_subparsers(dest="action", required=True)
    s = c.add_parser("check", help="decide compatibility")
    s.add_argument("file")
    s.add_argument("--tol", type=float, default=compat.MARGIN_TOL)
    s.add_argument("--emit-joint", action="store_true")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_compat_check)
    s = c.add_parser("robustness", help="noise robustness along a direction")
    s.add_argument("file")
    s.add_argument("--model", choices=(povm.BALANCED, povm.LINEAR), default=povm.BALANCED)
    s.add_argument("--direction", type=_float_list, default=None)
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_compat_robustness)

    s = sub.add_parser("zhu", help="Zhu incompatibility criterion")
    s.add_argument("file")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_zhu)

    w = sub.add_parser("witness", help="incompatibility witnesses").add_subparsers(dest="action", required=True)
    s = w.add_parser("check", help="is the candidate a witness")
    s.add_argument("file")
    s.add_argument("--method", choices=("exact", "sdp", "both"), default="both")
    s.add_argument("--theta", type=float, default=None)
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_witness_check)
    s = w.add_parser("apply", help="evaluate a witness on a measurement set")
    s.add_argument("witness")
    s.add_argument("set")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_witness_apply)

    s = sub.add_parser("bounds", help="analytic bounds on the compatibility region")
    s.add_argument("--g", type=int, required=True)
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--k", type=_int_list, required=True)
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_bounds)

    r = sub.add_parser("region", help="region sampling").add_subparsers(dest="action", required=True)
    s = r.add_parser("scan", help="robustness along sampled directions, as CSV")
    s.add_argument("file")
    s.add_argument("--model", choices=(povm.BALANCED, povm.LINEAR), default=povm.BALANCED)
    s.add_argument("--directions", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_region_scan)

    j = sub.add_parser("jewel", help="matrix jewel geometry").add_subparsers(dest="action", required=True)
    s = j.add_parser("vertices", help="extreme points of the level-1 jewel base")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_jewel_vertices)

    cu = sub.add_parser("cuboid", help="matrix cuboid geometry").add_subparsers(dest="action", required=True)
    s = cu.add_parser("vertices", help="vertices of the level-1 cuboid")
    s.add_argument("--k", type=_int_list, required=True)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_cuboid_vertices)

    s = sub.add_parser("mub", help="write mutually unbiased basis POVMs")
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--count", type=int, default=2)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_mub)

    gen = sub.add_parser("gen", help="generators").add_subparsers(dest="action", required=True)
    s = gen.add_parser("random", help="seeded random measurement set")
    s.add_argument("--g", type=int, required=True)
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--k", type=_int_list, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_gen_random)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NumericalError as exc:
        print(f"jewel: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValidationError, OSError, ValueError) as exc:
        print(f"jewel: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
