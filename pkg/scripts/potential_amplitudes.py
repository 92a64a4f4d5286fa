#!/usr/bin/env python3
"""Emit the dimensionless Fourier amplitudes V_n(qbar), n = 3..7, on the
standard 601-point grid over qbar in [0, 30] (CSV: qbar,n,Vn)."""

import argparse
import pathlib
import sys

from nct.cli import main as nct_main


def run(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out/potential_amplitudes.csv")
    args = parser.parse_args(argv)
    pathlib.Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    rc = nct_main(["potential", "--output", args.out])
    print(f"wrote {args.out}")
    return rc


if __name__ == "__main__":
    sys.exit(run())
