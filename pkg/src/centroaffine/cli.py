"""Command-line front end: invariant pipelines in, CSV/SVG files out.

Exit codes: 0 success, 2 input/format error, 3 numeric or stability error,
4 matching failure.  Flags override --config (JSON) values, which override
built-in defaults.  All outputs are deterministic for identical inputs.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import contour_io, curve_core, flows, matching, preprocess
from .errors import (
    BandInfeasible,
    CentroAffineError,
    DegenerateArea,
    DegenerateConfiguration,
    DegenerateInit,
    EmptyOverlap,
    InvariantViolation,
    IrregularPoint,
    KappaVanishes,
    MatchingFailure,
    NoContour,
    ParseError,
    PastShock,
    PointAtInfinity,
    RangeExceeded,
    ShockEncountered,
    SingularFit,
    StabilityViolation,
    TooFewPoints,
    TooFewRegularPoints,
    Unclassified,
    ZeroVariance,
)

INPUT_ERRORS = (ParseError, InvariantViolation, TooFewPoints, NoContour,
                DegenerateArea, DegenerateConfiguration, DegenerateInit,
                Unclassified, ZeroVariance, BandInfeasible, FileNotFoundError,
                EmptyOverlap, PointAtInfinity)
NUMERIC_ERRORS = (IrregularPoint, TooFewRegularPoints, StabilityViolation,
                  ShockEncountered, PastShock, KappaVanishes, RangeExceeded,
                  SingularFit)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3
EXIT_MATCHING = 4

EPILOG = """\
exit codes:
  0  success
  2  input error (parsing, file access, invalid arguments or geometry)
  3  numeric or stability error (irregular points, shocks, singular fits)
  4  matching failure

environment:
  CENTROAFFINE_THREADS  caps parallel pairwise evaluations in `match`
"""


def _condition(curve, args):
    return preprocess.condition_contour(
        curve, sigma=args.sigma, k=args.points, degree=args.spline_degree,
        resample=args.resample, center=not args.no_center)


def cmd_invariants(args) -> int:
    cf = contour_io.load_contours(args.infile)
    signatures = {}
    for name, curve in cf.contours.items():
        cond = _condition(curve, args)
        signatures[name] = preprocess.spline_signature(cond.spline, clip=args.clip)
    contour_io.export_signature_csv(args.out, signatures)
    print(f"wrote {len(signatures)} signature(s) to {args.out}")
    return EXIT_OK


def _parse_beta(text) -> flows.BetaSpec:
    t = text.strip().lower()
    if t in ("one", "1", "constant", "constant_one"):
        return flows.BetaSpec()
    if t == "kappa":
        return flows.BetaSpec("power", 1)
    if t.startswith("power:"):
        return flows.BetaSpec("power", int(t.split(":", 1)[1]))
    if t.startswith("poly:"):
        coeffs = tuple(float(c) for c in t.split(":", 1)[1].split(","))
        return flows.BetaSpec("polynomial", coeffs=coeffs)
    raise InvariantViolation(f"unknown beta spec {text!r}")


def cmd_flow(args) -> int:
    cf = contour_io.load_contours(args.infile)
    if args.contour is not None:
        if args.contour not in cf.contours:
            raise InvariantViolation(f"no contour named {args.contour!r}")
        curve = cf.contours[args.contour]
    else:
        curve = next(iter(cf.contours.values()))
    beta = _parse_beta(args.beta)
    states = flows.evolve(curve, args.T, args.dt, beta,
                          resample_every=args.resample_every,
                          save_every=args.save_every)
    contour_io.export_trajectory_csv(args.out, states)
    final = states[-1]
    scale = float(np.max(np.hypot(*final.curve.points.T)))
    print(f"evolved to t = {final.t:.6g}; {len(states)} frames; "
          f"max |C| = {scale:.6g}")
    if args.check_conservation:
        drift = flows.conservation_drift(states)
        print(f"max kappa/g drift = {drift:.3e}")
        if drift > 1e-3:
            print("conservation drift exceeds 1e-3", file=sys.stderr)
            return EXIT_NUMERIC
    return EXIT_OK


def cmd_burgers(args) -> int:
    import csv as _csv
    with open(args.kappa0, newline="") as fh:
        reader = _csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:2]] != ["s", "kappa"]:
            raise ParseError("kappa profile needs an 's,kappa' header", line=1)
        s, k = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                s.append(float(row[0]))
                k.append(float(row[1]))
            except (ValueError, IndexError):
                raise ParseError("malformed profile row", line=lineno) from None
    s = np.asarray(s)
    k = np.asarray(k)
    period = None if args.period is None else float(args.period)
    kt = flows.burgers_characteristics(s, k, args.t, period=period)
    with open(args.out, "w", newline="") as fh:
        w = _csv.writer(fh)
        w.writerow(["s", "kappa"])
        for si, ki in zip(s, kt):
            w.writerow([contour_io.FLOAT_FMT % si, contour_io.FLOAT_FMT % ki])
    print(f"shock time = {flows.shock_time(s, k):.6g}")
    if args.oracle == "upwind":
        if period is None:
            raise InvariantViolation("--oracle upwind needs --period")
        ku = flows.upwind_burgers(s, k, args.t, period)
        print(f"sup |characteristic - upwind| = {np.max(np.abs(kt - ku)):.3e}")
    return EXIT_OK


def _match_items(cf, args):
    items = []
    for name, curve in cf.contours.items():
        cond = _condition(curve, args)
        sig = preprocess.spline_signature(cond.spline, clip=args.clip)
        desc = matching.descriptor(cond.resampled, barycenter=cond.barycenter,
                                   signature=sig)
        items.append(matching.ContourMatchItem(name, desc, sig))
    return items


def cmd_match(args) -> int:
    items_a = _match_items(contour_io.load_contours(args.a), args)
    items_b = _match_items(contour_io.load_contours(args.b), args)
    result = matching.match_contours(items_a, items_b, optimal=args.optimal)
    if not result.pairs:
        print("no contour pairs matched", file=sys.stderr)
        return EXIT_MATCHING
    rows = []
    for i, j, align in result.pairs:
        for ia, ib in align.correspondences:
            rows.append((items_a[i].name, items_b[j].name, ia, ib))
    contour_io.export_correspondence_csv(args.out, rows)
    print(f"matched {len(result.pairs)} contour pair(s); "
          f"unmatched: {len(result.unmatched_a)} left, {len(result.unmatched_b)} right")
    if args.report:
        import csv as _csv
        la = [items_a[i].descriptor.total_arclength for i, _, _ in result.pairs]
        lb = [items_b[j].descriptor.total_arclength for _, j, _ in result.pairs]
        with open(args.report, "w", newline="") as fh:
            w = _csv.writer(fh)
            w.writerow(["contourA_id", "contourB_id", "error1", "error2",
                        "arclengthA", "arclengthB"])
            for (i, j, align), A, B in zip(result.pairs, la, lb):
                w.writerow([items_a[i].name, items_b[j].name,
                            contour_io.FLOAT_FMT % align.error1,
                            contour_io.FLOAT_FMT % align.error2,
                            contour_io.FLOAT_FMT % A, contour_io.FLOAT_FMT % B])
            if len(la) >= 2:
                try:
                    corr = matching.correlation(la, lb)
                except ZeroVariance:
                    corr = float("nan")
                w.writerow([])
                w.writerow(["correlation_matrix", "", "", "", "", ""])
                w.writerow(["", "A", "B", "", "", ""])
                w.writerow(["A", "1", contour_io.FLOAT_FMT % corr, "", "", ""])
                w.writerow(["B", contour_io.FLOAT_FMT % corr, "1", "", "", ""])
        print(f"wrote report to {args.report}")
    return EXIT_OK


def cmd_synth(args) -> int:
    with open(args.spec) as fh:
        doc = json.load(fh)
    specs = doc if isinstance(doc, list) else [doc]
    contours = {}
    for i, entry in enumerate(specs):
        name = entry.pop("name", f"synth_{i}")
        res = contour_io.generate_synthetic(contour_io.SyntheticSpec.from_dict(entry))
        contours[name] = res.curve
    contour_io.export_contours_csv(args.out, contours)
    print(f"wrote {len(contours)} synthetic contour(s) to {args.out}")
    return EXIT_OK


def cmd_homography(args) -> int:
    pairs_rows = contour_io.load_correspondence_csv(args.pairs)
    pts_a = contour_io.load_contours(args.points[0]).contours
    pts_b = contour_io.load_contours(args.points[1]).contours
    pairs = []
    for a, b, ia, ib in pairs_rows:
        if a not in pts_a or b not in pts_b:
            raise InvariantViolation(f"correspondence names unknown: {a!r}, {b!r}")
        pairs.append((pts_a[a].points[ia], pts_b[b].points[ib]))
    H = matching.estimate_homography(pairs)
    residual = matching.reprojection_residual(H, pairs)
    import csv as _csv
    with open(args.out, "w", newline="") as fh:
        w = _csv.writer(fh)
        for row in H.h:
            w.writerow([contour_io.FLOAT_FMT % v for v in row])
    print(f"reprojection residual = {residual:.6e}")
    return EXIT_OK


def cmd_classify(args) -> int:
    cls = curve_core.classify_constant(args.kappa, args.eps)
    print(curve_core.format_class(cls))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="centroaffine",
        description="Centro-affine curve invariants, heat flow, and contour matching.",
        epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--config", help="JSON file with default option values")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_pipeline_opts(p):
        p.add_argument("--spline-degree", type=int, default=4)
        p.add_argument("--clip", type=float, default=100.0,
                       help="drop samples with |kappa| above this")
        p.add_argument("--sigma", type=float, default=2.0,
                       help="Gaussian smoothing width (index units)")
        p.add_argument("--points", type=int, default=85,
                       help="resampled point count per contour")
        p.add_argument("--resample", choices=["kmeans", "arclength", "none"],
                       default="kmeans")
        p.add_argument("--no-center", action="store_true",
                       help="skip barycenter centering")

    p = sub.add_parser("invariants", help="contours -> invariant signatures")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    add_pipeline_opts(p)
    p.set_defaults(func=cmd_invariants)

    p = sub.add_parser("flow", help="evolve a contour by the invariant heat flow")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--contour", help="contour id (default: first)")
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--dt", type=float, required=True)
    p.add_argument("--beta", default="one",
                   help="one | kappa | power:N | poly:c0,c1,...")
    p.add_argument("--out", required=True)
    p.add_argument("--check-conservation", action="store_true")
    p.add_argument("--save-every", type=int, default=10)
    p.add_argument("--resample-every", type=int, default=10)
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("burgers", help="characteristic solution of the curvature dynamics")
    p.add_argument("--kappa0", required=True, help="CSV with s,kappa header")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--period", type=float, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--oracle", choices=["upwind"], default=None)
    p.set_defaults(func=cmd_burgers)

    p = sub.add_parser("match", help="match two contour sets")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--report", default=None)
    p.add_argument("--optimal", action="store_true",
                   help="Hungarian assignment instead of greedy")
    add_pipeline_opts(p)
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("synth", help="generate synthetic contours")
    p.add_argument("--spec", required=True, help="JSON spec (object or list)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("homography", help="normalized DLT from correspondences")
    p.add_argument("--pairs", required=True)
    p.add_argument("--points", nargs=2, required=True,
                   metavar=("PTSA", "PTSB"))
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_homography)

    p = sub.add_parser("classify", help="constant-curvature classification")
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--eps", type=int, default=1)
    p.set_defaults(func=cmd_classify)
    return parser


def _apply_config(parser, argv):
    ns, _ = parser.parse_known_args(argv)
    if ns.config:
        with open(ns.config) as fh:
            try:
                cfg = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid config JSON: {exc}") from None
        if not isinstance(cfg, dict):
            raise ParseError("config must be a JSON object")
        for action in parser._subparsers._group_actions:
            for subparser in getattr(action, "choices", {}).values():
                subparser.set_defaults(**{k.replace("-", "_"): v
                                          for k, v in cfg.items()})


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
        return args.func(args)
    except INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NUMERIC_ERRORS as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except MatchingFailure as exc:
        print(f"matching failure: {exc}", file=sys.stderr)
        return EXIT_MATCHING
    except CentroAffineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
