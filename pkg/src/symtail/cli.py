"""Command-line entry point: ``symtail <subcommand> ...``.

Exit codes: 0 pass, 1 fail, 2 usage or configuration error.
"""

import argparse
import csv
import json
import math
import os
import sys
from fractions import Fraction

from . import gf2, gmr, kwise, minwise, products, suite, sympoly, tailbounds
from .dists import FiniteDist, centered_bernoulli, centered_uniform, scaled_pm1
from .errors import DegeneratePivotError, SymtailError
from .report import SEED_ENV, RunConfig, jsonable

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class UsageError(Exception):
    """Bad input files or flag values; reported with exit code 2."""


def load_json(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}:{exc.lineno}:{exc.colno}: malformed JSON: "
                         f"{exc.msg}") from None


def load_vector(path):
    data = load_json(path)
    if not isinstance(data, list):
        raise UsageError(f"{path}: expected a JSON array of numbers or 'p/q' strings")
    for x in data:
        if isinstance(x, bool) or not isinstance(x, (int, float, str)):
            raise UsageError(f"{path}: entry {x!r} is not a number or 'p/q' string")
    return data


def _kind_dist(kind, scale, p=None, m=None):
    if kind == "pm1":
        return scaled_pm1(scale)
    if kind == "bernoulli":
        return centered_bernoulli(p, scale)
    if kind == "uniform":
        return centered_uniform(m, scale)
    raise UsageError(f"unknown coordinate kind {kind!r}")


def load_coordinates(path):
    """Coordinate laws from a sigma-spec file.

    Either ``{"coordinates": [[{"value", "prob"}, ...], ...]}`` or a shorthand
    ``{"n": N, "kind": "pm1"|"bernoulli"|"uniform", "scale": "p/q"}`` where
    ``"sigma"`` may replace ``"scale"`` to fix the aggregate deviation.
    """
    data = load_json(path)
    if isinstance(data, list):
        data = {"coordinates": data}
    if not isinstance(data, dict):
        raise UsageError(f"{path}: expected a JSON object")
    if "coordinates" in data:
        return [FiniteDist.from_json(c) for c in data["coordinates"]]
    try:
        n = int(data["n"])
        kind = data.get("kind", "pm1")
        unit = _kind_dist(kind, 1, data.get("p", "1/2"), data.get("m", 2))
        if "sigma" in data:
            scale = Fraction(float(data["sigma"]) / math.sqrt(n * float(unit.variance)))
        else:
            scale = sympoly.to_fraction(data["scale"])
    except KeyError as exc:
        raise UsageError(f"{path}: missing field {exc.args[0]!r}") from None
    return [_kind_dist(kind, scale, data.get("p", "1/2"), data.get("m", 2))] * n


def emit(args, payload, summary):
    text = json.dumps(jsonable(payload), indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    if not args.json_only and summary:
        print(summary, file=sys.stderr)


def _config(args):
    seed = args.seed
    if os.environ.get(SEED_ENV) is not None:
        try:
            seed = int(os.environ[SEED_ENV], 0)
        except ValueError:
            raise UsageError(f"{SEED_ENV} must be an integer") from None
    return RunConfig(master_seed=seed, workers=args.workers,
                     trials=getattr(args, "trials", None), output=args.out)


# --- subcommands ------------------------------------------------------------------


def cmd_check_ineq(args):
    a = load_vector(args.input)
    if args.theorem == "12":
        rep = sympoly.theorem12_check(a, args.mode)
    elif args.theorem == "maclaurin":
        rep = sympoly.maclaurin_check(a, args.mode)
    else:
        if args.k is None:
            raise UsageError("--theorem 14 needs --k")
        C = args.C
        if C is None:
            prof = sympoly.elementary_profile(a, args.mode)
            C = sympoly.minimal_theorem14_constant(prof, args.k)
            if C is None:
                C = 0.0
            a = prof
        rep = sympoly.theorem14_check(a, args.k, C, args.mode)
    out = rep.to_dict()
    out["command"] = "check-ineq"
    out["min_slack"] = rep.min_slack
    emit(args, out, f"theorem {rep.theorem}: {rep.verdict} "
                    f"(min slack {rep.min_slack:.6g})")
    return EXIT_FAIL if rep.verdict == "violated" else EXIT_PASS


def parse_alphabet(text):
    if text == "pm1":
        return kwise.PM1
    if text.startswith("m") and text[1:].isdigit():
        return int(text[1:])
    raise UsageError(f"alphabet must be 'pm1' or 'mM' (e.g. m8), got {text!r}")


def cmd_sample(args):
    cfg = _config(args)
    spec = kwise.KWiseSpec(n=args.n, k=args.k, alphabet=parse_alphabet(args.alphabet),
                           field_bits=args.field_bits, master_seed=cfg.master_seed)
    batch = kwise.sample_batch(spec, args.start, args.trials)
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(fh)
        w.writerow([f"x{i}" for i in range(spec.n)])
        w.writerows(batch.rows.tolist())
    finally:
        if args.out:
            fh.close()
    if not args.json_only:
        print(json.dumps({"provenance": batch.provenance,
                          "seed_bits": kwise.seed_length(spec).to_dict()}),
              file=sys.stderr)
    return EXIT_PASS


def cmd_fieldinfo(args):
    rows = gf2.field_info()
    if args.json_only or args.out:
        emit(args, {"irreducible": rows}, None)
    else:
        for r in rows:
            print(f"b={r['bits']:>2}  2^b={r['order']:>6}  {r['modulus']:>8}  "
                  f"{r['polynomial']}")
    return EXIT_PASS


def cmd_tailbound(args):
    cfg = _config(args)
    dists = load_coordinates(args.sigma_spec)
    q = tailbounds.TailQuery(args.k, args.t, args.trials, args.dist,
                             cfg.master_seed, args.statistic, args.threshold)
    rep = tailbounds.mc_tail_experiment(q, dists, cfg.workers)
    emit(args, rep.to_dict(),
         f"tailbound: P[tail >= {rep.parameters['threshold']:.4g}] ~ "
         f"{rep.estimate:.4g} [{rep.ci_low:.3g}, {rep.ci_high:.3g}] vs bound "
         f"{rep.reference:.4g}: {rep.verdict}")
    return EXIT_PASS if rep.verdict != "fail" else EXIT_FAIL


def cmd_product(args):
    cfg = _config(args)
    spec = products.BoundedVarSpec.from_json(load_json(args.spec))
    try:
        ks = [int(x) for x in args.k_ladder.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"--k-ladder must be comma-separated integers") from None
    rep = products.product_error_ladder(spec, ks, args.c1, args.c2, args.c_prime,
                                        seed=cfg.master_seed)
    lines = [f"k={r['k']} error={r['error']:.4g} bound={r['bound_c_prime']:.4g}"
             for r in rep.extra["ladder"]]
    emit(args, rep.to_dict(), "\n".join(lines) + f"\nproduct: {rep.verdict}")
    return EXIT_PASS if rep.passed else EXIT_FAIL


def cmd_gmr(args):
    cfg = _config(args)
    params = gmr.GmrParams(args.n, args.m, args.delta, args.C)
    if args.action == "schedule":
        if args.json_only or args.out:
            payload = params.to_dict()
            payload["seed_length"] = gmr.seed_length(params)
            emit(args, payload, None)
        else:
            print(params.table())
        return EXIT_PASS
    if args.rects:
        rects = gmr.load_rectangles(load_json(args.rects), args.m, args.n)
    else:
        rects = [r for _, r in gmr.rectangle_battery(args.n, args.m, 20,
                                                     cfg.master_seed)]
    if args.hybrid:
        reps = [gmr.hybrid_diagnostic(params, r, args.trials, cfg.master_seed,
                                      workers=cfg.workers) for r in rects]
    else:
        reps = gmr.rectangle_battery_test(params, rects, args.trials,
                                          cfg.master_seed, cfg.workers)
    ok = all(r.verdict != "fail" for r in reps)
    emit(args, {"command": "gmr", "verdict": "pass" if ok else "fail",
                "reports": [r.to_dict() for r in reps]},
         f"gmr: {sum(r.verdict != 'fail' for r in reps)}/{len(reps)} rectangles pass")
    return EXIT_PASS if ok else EXIT_FAIL


def cmd_minwise(args):
    cfg = _config(args)
    S = load_json(args.S)
    if not isinstance(S, list) or not all(isinstance(s, int) for s in S):
        raise UsageError(f"{args.S}: expected a JSON array of integers")
    try:
        T = tuple(int(t) for t in args.T.split(",") if t.strip())
    except ValueError:
        raise UsageError("--T must be comma-separated integers") from None
    n = args.n if args.n is not None else max(S) + 1
    fam = minwise.make_family(args.family, n, args.m, cfg.master_seed, args.delta,
                              args.C, args.k)
    q = minwise.MinwiseQuery(tuple(S), T, args.m)
    rep = minwise.minwise_test(fam, q, args.trials, cfg.workers, args.eps)
    emit(args, rep.to_dict(),
         f"minwise: {rep.estimate:.4g} vs {rep.reference:.4g} "
         f"(tolerance {rep.parameters['tolerance']:.3g}): {rep.verdict}")
    return EXIT_PASS if rep.passed else EXIT_FAIL


def cmd_suite(args):
    cfg = _config(args)
    crit = (range(1, 10) if not args.criteria
            else [int(c) for c in args.criteria.split(",")])

    def progress(res):
        if not args.json_only:
            print(res.line(), file=sys.stderr)

    results = suite.run_suite(args.quick, cfg.master_seed, cfg.workers, crit, progress)
    ok = all(r.passed for r in results)
    emit(args, {"command": "suite", "quick": args.quick, "passed": ok,
                "criteria": [r.to_dict() for r in results]},
         f"suite: {sum(r.passed for r in results)}/{len(results)} criteria pass")
    return EXIT_PASS if ok else EXIT_FAIL


# --- parser -----------------------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0,
                        help=f"master seed (overridden by ${SEED_ENV})")
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--out", help="write JSON here instead of stdout")
    common.add_argument("--json-only", action="store_true",
                        help="suppress human-readable summaries")

    p = argparse.ArgumentParser(prog="symtail", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("check-ineq", parents=[common],
                       help="check an inequality on one vector")
    s.add_argument("--input", required=True)
    s.add_argument("--theorem", choices=["12", "14", "maclaurin"], default="12")
    s.add_argument("--mode", choices=list(sympoly.MODES), default="exact")
    s.add_argument("--k", type=int)
    s.add_argument("--C", type=float)
    s.set_defaults(func=cmd_check_ineq)

    s = sub.add_parser("sample", parents=[common], help="write k-wise samples as CSV")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--alphabet", default="pm1")
    s.add_argument("--field-bits", type=int)
    s.add_argument("--trials", type=int, default=10)
    s.add_argument("--start", type=int, default=0)
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("fieldinfo", parents=[common],
                       help="print the irreducible polynomial table")
    s.set_defaults(func=cmd_fieldinfo)

    s = sub.add_parser("tailbound", parents=[common], help="Monte Carlo tail test")
    s.add_argument("--dist", choices=["full", "kwise"], default="full")
    s.add_argument("--sigma-spec", required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--t", type=float, required=True)
    s.add_argument("--trials", type=int, default=100_000)
    s.add_argument("--statistic", choices=list(tailbounds.STATISTICS), default="thm15")
    s.add_argument("--threshold", type=float)
    s.set_defaults(func=cmd_tailbound)

    s = sub.add_parser("product", parents=[common], help="product-rule error ladder")
    s.add_argument("--spec", required=True)
    s.add_argument("--k-ladder", default="1,2,3")
    s.add_argument("--c1", type=float, default=40)
    s.add_argument("--c2", type=float, default=0.25)
    s.add_argument("--c-prime", type=float, default=40)
    s.set_defaults(func=cmd_product)

    s = sub.add_parser("gmr", parents=[common],
                       help="rectangle tests or the level schedule")
    s.add_argument("action", nargs="?", choices=["test", "schedule"], default="test")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--delta", type=float, default=0.1)
    s.add_argument("--C", type=float, default=gmr.DEFAULT_C)
    s.add_argument("--rects")
    s.add_argument("--trials", type=int, default=10_000)
    s.add_argument("--hybrid", action="store_true",
                   help="run the per-level hybrid diagnostic instead")
    s.set_defaults(func=cmd_gmr)

    s = sub.add_parser("minwise", parents=[common], help="minima-event test")
    s.add_argument("--family", choices=["gmr", "kwise", "random"], default="gmr")
    s.add_argument("--S", required=True, help="JSON array of coordinates")
    s.add_argument("--T", required=True, help="comma-separated ordered tuple")
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--n", type=int)
    s.add_argument("--trials", type=int, default=100_000)
    s.add_argument("--delta", type=float, default=0.1)
    s.add_argument("--C", type=float, default=gmr.DEFAULT_C)
    s.add_argument("--k", type=int, default=4, help="independence of the kwise family")
    s.add_argument("--eps", type=float, help="override the family's rectangle error")
    s.set_defaults(func=cmd_minwise)

    s = sub.add_parser("suite", parents=[common], help="run the acceptance battery")
    s.add_argument("--quick", action="store_true")
    s.add_argument("--criteria", help="comma-separated subset, e.g. 1,2,5")
    s.set_defaults(func=cmd_suite)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_CONFIG
    try:
        return args.func(args)
    except (UsageError, SymtailError, DegeneratePivotError) as exc:
        print(f"symtail {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
