#!/usr/bin/env python3
"""Reproduce the reference-value comparisons (tube mechanics, thermal tip
displacement, gas critical temperatures) and the per-mode table as CSV."""

import argparse
import pathlib
import sys

from nct.cli import main as nct_main


def run(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="out", help="output directory")
    parser.add_argument("--config", default=None)
    args = parser.parse_args(argv)
    out = pathlib.Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    base = ["--config", args.config] if args.config else []
    rc = nct_main(["tables", *base, "--output", str(out / "tables.csv")])
    rc |= nct_main(["modes", *base, "--full",
                    "--output", str(out / "modes.csv")])
    print(f"wrote {out / 'tables.csv'} and {out / 'modes.csv'}")
    return rc


if __name__ == "__main__":
    sys.exit(run())
