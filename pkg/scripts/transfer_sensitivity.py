#!/usr/bin/env python3
"""Detuning sensitivity of direct state transfer through the cable.

Runs the undriven single-excitation hand-off (qubit A -> cable -> qubit B)
for several qubit detunings and prints the peak transfer probability of
each, writing one population trace CSV per detuning.  This is the protocol
the remote CR gate replaces: a few MHz of detuning already collapses the
transfer efficiency, which is why fixed-frequency qubits need the gate.

Usage:
    python scripts/transfer_sensitivity.py [--out DIR]
"""

import argparse
import sys

from rcrsim.cli import main


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out/transfer")
    args = parser.parse_args()
    sys.exit(main(["reproduce", "fig7", "--out", args.out]))
