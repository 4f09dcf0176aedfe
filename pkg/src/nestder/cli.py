"""Command-line entry point.

Exit codes: 0 checks as expected, 2 input error, 3 theorem violation (a repro
bundle is written next to ``--out`` or to ``repro-<command>-<seed>.json``).
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from . import campaign
from .engine import OpMap
from .errors import ConsistencyError, InputError, TheoremViolation
from .linalg import parse_matrix
from .nest import NestSpec, build
from .scalars import FIELDS, RATIONAL

EXIT_OK, EXIT_INPUT, EXIT_VIOLATION = 0, 2, 3


def _nest(text):
    try:
        return NestSpec.parse(text)
    except InputError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _checks(text):
    return tuple(c.strip() for c in text.split(",") if c.strip())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nestder",
        description="Exact checks for ternary derivations on finite nest algebras.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, trials=True):
        p.add_argument("--nest", type=_nest, default=NestSpec((1, 2)), help="comma-separated dims, e.g. 1,2,4")
        p.add_argument("--field", choices=FIELDS, default=RATIONAL)
        p.add_argument("--seed", type=int, default=0)
        if trials:
            p.add_argument("--trials", type=int, default=10)
            p.add_argument("--workers", type=int, default=1, help="worker processes for trials")
        p.add_argument("--out", help="write the JSON report here")
        p.add_argument("--json", action="store_true", help="print the full JSON report")

    p = sub.add_parser("verify", help="seeded round trips of the main theorem")
    common(p)
    p.add_argument("--checks", type=_checks, default=campaign.VERIFY_CHECKS,
                   help="comma-separated subset of theorem,steps")

    p = sub.add_parser("corollaries", help="classify constructed positives and negatives")
    common(p)
    p.add_argument("--checks", type=_checks, default=("corollaries",),
                   help="'corollaries' for all, or comma-separated names: " + ",".join(campaign.COROLLARIES))

    p = sub.add_parser("counterexample", help="reproduce the non-nest counterexample")
    p.add_argument("--out")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("solve", help="decide the zero-product condition for given maps")
    common(p, trials=False)
    p.add_argument("--input", nargs=2, metavar=("DELTA", "TAU"), required=True,
                   help="matrix files for delta and tau (d x d, basis coordinates)")
    return parser


def _load_map(path, basis, field) -> OpMap:
    try:
        with open(path) as fh:
            M = parse_matrix(fh.read(), field)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}")
    if len(M) != basis.d or any(len(r) != basis.d for r in M):
        raise InputError(f"{path}: expected a {basis.d}x{basis.d} matrix for nest {list(basis.spec.dims)}")
    return OpMap(basis, M)


def _summary(report) -> str:
    body = report["body"]
    cmd = body["command"]
    if cmd == "verify":
        c = body["counts"]
        return (f"verify: {c['feasible_round_trips']}/{body['config']['trials']} feasible round trips, "
                f"{c['steps_passed']} step checks passed, malformed refuted {c['malformed_refuted']}, "
                f"inconclusive {c['malformed_inconclusive']}, in family {c['malformed_feasible']}")
    if cmd == "corollaries":
        lines = [f"{k}: {v}" for k, v in body["summary"].items()]
        return "\n".join(["corollaries: " + ("ok" if body["ok"] else "MISCLASSIFIED")] + lines)
    if cmd == "counterexample":
        cert = body["infeasibility_certificate"]
        return (f"counterexample: no completion (rank {cert['rank']}, augmented {cert['augmented_rank']}); "
                f"zero-product {body['zero_product_check']['verdict']}")
    return f"solve: {body['report']['verdict']}"


def _emit(report, args):
    text = json.dumps(report, sort_keys=True, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    if args.json:
        print(text)
    else:
        print(_summary(report))


def _write_bundle(args, exc):
    seed = getattr(args, "seed", 0)
    path = (args.out + ".repro.json") if args.out else f"repro-{args.command}-{seed}.json"
    with open(path, "w") as fh:
        json.dump({"error": str(exc), "bundle": exc.bundle}, fh, sort_keys=True, indent=2)
    return path


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        if args.command == "counterexample":
            report = campaign.cmd_counterexample()
        elif args.command == "solve":
            basis = build(args.nest)
            delta = _load_map(args.input[0], basis, args.field)
            tau = _load_map(args.input[1], basis, args.field)
            report = campaign.solve_report(delta, tau, seed=args.seed, field=args.field)
        else:
            if args.workers < 1:
                raise InputError("workers must be at least 1")
            cfg = campaign.CampaignConfig(args.nest, args.field, args.trials, args.seed, args.checks)
            run = campaign.cmd_verify if args.command == "verify" else campaign.cmd_corollaries
            report = run(cfg, workers=min(args.workers, os.cpu_count() or 1))
    except (InputError, ConsistencyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except TheoremViolation as exc:
        path = _write_bundle(args, exc)
        print(f"theorem violation: {exc}; repro bundle written to {path}", file=sys.stderr)
        return EXIT_VIOLATION
    _emit(report, args)
    if not report["body"].get("ok", True):
        path = _write_bundle(args, TheoremViolation("checks not as expected", report["body"]))
        print(f"checks not as expected; repro bundle written to {path}", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
