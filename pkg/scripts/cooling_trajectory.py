#!/usr/bin/env python3
"""Relaxation of a 4 K tube immersed in the configured gas: time series of
the effective tube temperature and the per-mode occupations."""

import argparse
import pathlib
import sys

from nct.cli import main as nct_main


def run(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out/cooling_trajectory.csv")
    parser.add_argument("--config", default=None)
    args = parser.parse_args(argv)
    pathlib.Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    base = ["--config", args.config] if args.config else []
    rc = nct_main(["cool", *base, "--output", args.out])
    print(f"wrote {args.out}")
    return rc


if __name__ == "__main__":
    sys.exit(run())
