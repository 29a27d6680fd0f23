#!/usr/bin/env python3
"""Reproduce the tabulated remote-CR gate benchmarks.

For each tabulated configuration this tunes the echoed pulse duration
inside a bracket around the nominal gate time, then reports the
entangling concurrence, the average gate fidelity, and the dissipative
concurrence.  Results land in the output directory as results.csv and
results.json.

Usage:
    python scripts/reproduce_gate_table.py [--out DIR] [--rows 0,1,...]
"""

import argparse
import sys

from rcrsim.cli import main


def parse_args():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out/table2",
                        help="output directory (default out/table2)")
    parser.add_argument("--rows", default=None,
                        help="comma-separated row indices (default all six)")
    parser.add_argument("--coarse-step-ns", default=None,
                        help="coarse scan step in ns (default 2)")
    return parser.parse_args()


if __name__ == "__main__":
    args = parse_args()
    argv = ["reproduce", "table2", "--out", args.out]
    if args.rows:
        argv += ["--rows", args.rows]
    if args.coarse_step_ns:
        argv += ["--coarse-step-ns", args.coarse_step_ns]
    sys.exit(main(argv))
