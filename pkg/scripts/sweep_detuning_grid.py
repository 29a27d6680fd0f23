#!/usr/bin/env python3
"""Entangling-power heat map over a grid of qubit detunings.

Tunes the echoed CR pulse in every grid cell and writes results.csv,
grid.svg, and results.json to the output directory.  The named targets
match the detuning grids studied for each cable length:

    fig3  0.25 m, g = 0.03 GHz, deltas 0.1..0.9
    fig4  0.5 m,  g = 0.03 GHz, delta_A 1.1..1.9, delta_B 0.1..0.9
    fig5  1 m,    g = 0.01 GHz, delta_A 2.1..2.9, delta_B 1.1..1.9
    fig8  1 m,    g = 0.01 GHz, deltas 1.1..1.9

These are long-running jobs (hours at full scale); use --jobs to spread
cells over processes, or run a custom sub-grid with `rcrsim sweep`.

Usage:
    python scripts/sweep_detuning_grid.py fig3 [--out DIR] [--jobs N]
"""

import argparse
import sys

from rcrsim.cli import main


def parse_args():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("target", choices=("fig3", "fig4", "fig5", "fig8"))
    parser.add_argument("--out", default=None,
                        help="output directory (default out/<target>)")
    parser.add_argument("--jobs", default="1",
                        help="worker processes (default 1)")
    parser.add_argument("--coarse-step-ns", default=None,
                        help="coarse scan step in ns (default 2)")
    return parser.parse_args()


if __name__ == "__main__":
    args = parse_args()
    argv = ["reproduce", args.target, "--out", args.out or f"out/{args.target}",
            "--jobs", args.jobs]
    if args.coarse_step_ns:
        argv += ["--coarse-step-ns", args.coarse_step_ns]
    sys.exit(main(argv))
