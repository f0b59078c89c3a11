"""Command-line entry point: ``augdist {dist, witness, verify, sample-stiefel}``.

Exit codes: 0 success, 1 verification failure or numerical breakdown,
2 invalid input, 3 unsupported combination, 4 dimension order,
5 support violation.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time

import numpy as np

from . import errors
from .dispatch import ROUTING_METHODS, compute_distance, parse_metric
from .io import (
    encode_float,
    load_measure,
    load_projection,
    projection_to_dict,
    report_to_dict,
    save_measure,
    write_json,
)
from .measures import AffineProjection, DiscreteMeasure, measure_to_spec
from .stiefel import OptimizerParams, random_projection
from .verify import DEFAULT_SEED, SUITES, run_suite
from .witness import witness_tv, witness_wp

log = logging.getLogger("augdist")

EXIT_FAILURE = 1
EXIT_INVALID = 2
EXIT_UNSUPPORTED = 3
EXIT_ORDER = 4
EXIT_SUPPORT = 5


def exit_code_for(exc: Exception) -> int:
    if isinstance(exc, errors.UnsupportedCombination):
        return EXIT_UNSUPPORTED
    if isinstance(exc, errors.DimensionOrder):
        return EXIT_ORDER
    if isinstance(exc, errors.SupportViolation):
        return EXIT_SUPPORT
    if isinstance(exc, (errors.ObjectiveNonFinite, errors.StepTooLarge)):
        return EXIT_FAILURE
    return EXIT_INVALID


def _emit(data: dict, path) -> None:
    text = write_json(data, path)
    if path is None:
        sys.stdout.write(text)


def cmd_dist(args) -> int:
    metric = parse_metric(args.metric)
    rho1, rho2 = load_measure(args.first), load_measure(args.second)
    projection = load_projection(args.projection) if args.projection else None
    params = OptimizerParams(restarts=args.restarts, seed=args.seed)
    start = time.perf_counter()
    report, swapped = compute_distance(metric, rho1, rho2, args.method, params, args.samples, projection)
    wall_ms = 1000.0 * (time.perf_counter() - start)
    log.info("dist %s via %s in %.1f ms", metric.label(), report.method, wall_ms)
    extra = {"metric": metric.label(), "swapped": swapped}
    _emit(report_to_dict(report, seed=args.seed, wall_ms=wall_ms if args.timing else None, extra=extra), args.output)
    return 0


def _witness_projection(args, m: int, n: int) -> AffineProjection:
    if args.projection:
        return load_projection(args.projection)
    V, b = random_projection(m, n, args.seed)
    return AffineProjection(V, b)


def cmd_witness(args) -> int:
    mu, nu = load_measure(args.first), load_measure(args.second)
    if not (isinstance(mu, DiscreteMeasure) and isinstance(nu, DiscreteMeasure)):
        raise errors.UnsupportedCombination("witnesses are built for discrete measures only")
    phi = _witness_projection(args, mu.dim, nu.dim)
    res = witness_tv(mu, nu, phi) if args.tv else witness_wp(mu, nu, phi, args.p)
    if args.alpha:
        save_measure(res.alpha_star, args.alpha)
    out = {
        "metric": "tv" if args.tv else f"wp:{args.p:g}",
        "lhs": encode_float(res.lhs),
        "rhs": encode_float(res.rhs),
        "diff": encode_float(res.lhs - res.rhs),
        "projection": projection_to_dict(phi),
        "seed": None if args.projection else args.seed,
        "alpha_star": measure_to_spec(res.alpha_star),
    }
    _emit(out, args.output)
    return 0


def cmd_verify(args) -> int:
    names = args.suite or list(SUITES)
    unknown = [s for s in names if s not in SUITES]
    if unknown:
        raise errors.InvalidParameter(f"unknown suite(s): {', '.join(unknown)}")
    failures = []
    # wall time stays out of the table unless asked for, so reruns print identical bytes
    header = f"{'suite':<26} {'result':<6} {'inst':>5} {'checks':>7} {'viol':>5} {'worst':>10}"
    print(header + (f" {'sec':>7}" if args.timing else ""))
    for name in names:
        res = run_suite(name, seed=args.seed, count=args.count, instances=args.instance)
        worst = f"{res.worst_excess:.2e}" if np.isfinite(res.worst_excess) else "-"
        row = (
            f"{name:<26} {'PASS' if res.passed else 'FAIL':<6} {res.instances:>5} {res.checks:>7} "
            f"{len(res.violations):>5} {worst:>10}"
        )
        print(row + (f" {res.seconds:>7.2f}" if args.timing else ""), flush=True)
        log.info("suite %s took %.2f s", name, res.seconds)
        failures.extend(v.to_dict() for v in res.violations)
    if failures:
        first = failures[0]
        print(
            f"{len(failures)} violation(s); replay the first with: augdist verify --suite "
            f"{first['data']['suite']} --seed {first['data']['seed']} --instance {first['instance']}"
        )
        if args.failures:
            write_json({"violations": failures}, args.failures)
        else:
            print(json.dumps(first))
        return EXIT_FAILURE
    return 0


def cmd_sample_stiefel(args) -> int:
    V, b = random_projection(args.m, args.n, args.seed)
    _emit({"V": V.tolist(), "b": b.tolist(), "seed": args.seed}, args.output)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="augdist", description="Distances between measures of different dimensions.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    d = sub.add_parser("dist", help="augmented distance between two measure specs")
    d.add_argument("first", help="measure spec (lower dimension)")
    d.add_argument("second", help="measure spec (higher dimension)")
    d.add_argument("--metric", default="w2")
    d.add_argument("--method", choices=ROUTING_METHODS, default="auto")
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--restarts", type=int, default=32)
    d.add_argument("--samples", type=int, default=2000, help="projections drawn by brute-force search")
    d.add_argument("--projection", help="evaluate at this fixed projection (projection or report file)")
    d.add_argument("--timing", action="store_true", help="include wall_ms in the report")
    d.add_argument("-o", "--output")
    d.set_defaults(func=cmd_dist)

    w = sub.add_parser("witness", help="build the embedding witness alpha* for a projection")
    w.add_argument("first", help="discrete measure mu in R^m")
    w.add_argument("second", help="discrete measure nu in R^n")
    kind = w.add_mutually_exclusive_group()
    kind.add_argument("--p", type=float, default=2.0)
    kind.add_argument("--tv", action="store_true")
    w.add_argument("--projection", help="projection file; default is a Haar draw from --seed")
    w.add_argument("--seed", type=int, default=0)
    w.add_argument("--alpha", help="write alpha* as a measure spec here")
    w.add_argument("-o", "--output")
    w.set_defaults(func=cmd_witness)

    v = sub.add_parser("verify", help="run the randomized property suites")
    v.add_argument("--suite", action="append", help="run only this suite (repeatable)")
    v.add_argument("--seed", type=int, default=DEFAULT_SEED)
    v.add_argument("--instance", type=int, action="append", help="replay only this instance index (repeatable)")
    v.add_argument("--count", type=int, help="override the number of instances per suite")
    v.add_argument("--failures", help="write all violations as JSON here")
    v.add_argument("--timing", action="store_true", help="add a wall-time column")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("sample-stiefel", help="Haar-distributed V with orthonormal rows and a normal offset b")
    s.add_argument("m", type=int)
    s.add_argument("n", type=int)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_sample_stiefel)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except errors.AugDistError as exc:
        print(f"augdist: error: {exc}", file=sys.stderr)
        return exit_code_for(exc)


if __name__ == "__main__":
    sys.exit(main())
