#!/usr/bin/env python3
"""Run every experiment suite into one output directory.

Usage: python scripts/run_all_suites.py [--out runs/all] [--seed 0] [--config FILE]
"""

import argparse

from biflow.harness import run_suite


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="runs/all")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--config", default=None)
    args = ap.parse_args()
    manifest = run_suite("all", args.config, args.out, seed=args.seed)
    print(f"wall time: {manifest.wall_time_s:.1f}s")
    for check, ok in manifest.summary.items():
        print(f"  {check}: {'pass' if ok else 'FAIL'}")
    print(f"reports in {args.out}/")


if __name__ == "__main__":
    main()
