#!/usr/bin/env python3
"""Sweep k and compare the analytic bounds with the measured worst-case load
of the stem scheme at the best integer radius."""

import argparse
import sys

from toruslb.cli import main as cli_main


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=10)
    parser.add_argument("--kmax", type=int, default=18)
    parser.add_argument("--out", default="-")
    args = parser.parse_args()
    return cli_main(["bounds", "--n", str(args.n), "--k", str(args.kmax), "--out", args.out])


if __name__ == "__main__":
    sys.exit(main())
