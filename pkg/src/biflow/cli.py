"""Command-line front end.

Subcommands: kernel-verify, evolve, contraction-sweep, norms, operators,
distance, kernel, flow, all.  Global flags --config/--out/--seed/--threads
are accepted on every subcommand.
"""

from __future__ import annotations

import argparse
import sys

from .errors import ConfigError
from .harness import (SUITES, run_contraction_sweep, run_evolve,
                      run_kernel_verify, run_suite)


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", default=None, help="sectioned config file")
    p.add_argument("--out", default="runs", help="output directory")
    p.add_argument("--seed", type=int, default=0, help="ensemble seed")
    p.add_argument("--threads", type=int, default=1,
                   help="reserved; execution stays sequential for determinism")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="biflow",
        description="Biharmonic map heat flow: kernel certificates, norm "
                    "experiments, and Picard solves on a periodic box.")
    sub = parser.add_subparsers(dest="command", required=True)

    kv = sub.add_parser("kernel-verify", help="emit one kernel decay certificate")
    kv.add_argument("--dim", type=int, default=1)
    kv.add_argument("--estimate", required=True, choices=["2.2", "2.3", "2.4", "2.5"])
    kv.add_argument("--order", type=int, default=0)
    kv.add_argument("--tol", type=float, default=1e-9)
    kv.add_argument("--c1", type=float, default=0.5)
    kv.add_argument("--out", required=True, help="output JSON file")
    kv.add_argument("--config", default=None)
    kv.add_argument("--seed", type=int, default=0)
    kv.add_argument("--threads", type=int, default=1)

    ev = sub.add_parser("evolve", help="run one Picard solve and dump the solution")
    _add_common(ev)

    cs = sub.add_parser("contraction-sweep", help="Picard runs across amplitudes")
    _add_common(cs)
    cs.add_argument("--amplitudes", required=True,
                    help="comma-separated list, e.g. 0.02,0.05,0.1")

    for name in SUITES:
        sp = sub.add_parser(name, help=f"run the {name} experiment suite")
        _add_common(sp)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "kernel-verify":
            payload = run_kernel_verify(args.dim, args.estimate, args.order,
                                        args.tol, args.out, c1=args.c1)
            print(f"wrote certificate {args.estimate} (order {args.order}) "
                  f"fitted_constant={payload['fitted_constant']:.6g} -> {args.out}")
            return 0
        if args.command == "evolve":
            manifest = run_evolve(args.config, args.out, seed=args.seed)
        elif args.command == "contraction-sweep":
            amplitudes = [float(a) for a in args.amplitudes.split(",")]
            manifest = run_contraction_sweep(args.config, args.out, amplitudes,
                                             seed=args.seed)
        else:
            manifest = run_suite(args.command, args.config, args.out,
                                 seed=args.seed, threads=args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    for check, ok in manifest.summary.items():
        print(f"{check}: {'pass' if ok else 'FAIL'}")
    hard_fail = any(not ok for ok in manifest.summary.values())
    return 1 if hard_fail else 0


if __name__ == "__main__":
    raise SystemExit(main())
