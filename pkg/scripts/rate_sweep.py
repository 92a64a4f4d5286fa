#!/usr/bin/env python3
"""Excitation-rate sweep over the five reference densities and the scaled
temperature grid T/T_BEC in [1.05, 5] (CSV: n_cm3, T_over_Tbec, rate_per_s,
omega0_per_s)."""

import argparse
import pathlib
import sys

from nct.cli import main as nct_main


def run(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out/rate_sweep.csv")
    parser.add_argument("--config", default=None)
    parser.add_argument("--jobs", type=int, default=1)
    args = parser.parse_args(argv)
    pathlib.Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    base = ["--config", args.config] if args.config else []
    rc = nct_main(["sweep", *base, "--jobs", str(args.jobs),
                   "--output", args.out])
    print(f"wrote {args.out}")
    return rc


if __name__ == "__main__":
    sys.exit(run())
