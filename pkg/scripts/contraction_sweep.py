#!/usr/bin/env python3
"""Sweep the Picard iteration over initial-data amplitudes.

Emits a CSV of (amplitude, oscillation seminorm, max contraction ratio,
converged, iterations, last difference).  Useful for locating the empirical
smallness threshold where contraction starts to fail.

Usage: python scripts/contraction_sweep.py --amplitudes 0.02,0.05,0.1,0.2,0.4
"""

import argparse

from biflow.harness import run_contraction_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--amplitudes", default="0.02,0.05,0.1,0.2")
    ap.add_argument("--out", default="runs/contraction")
    ap.add_argument("--config", default=None)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    amplitudes = [float(a) for a in args.amplitudes.split(",")]
    manifest = run_contraction_sweep(args.config, args.out, amplitudes,
                                     seed=args.seed)
    print(f"wrote {args.out}/contraction_sweep.csv "
          f"(all converged: {manifest.summary['all_converged']})")


if __name__ == "__main__":
    main()
