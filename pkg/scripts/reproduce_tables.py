#!/usr/bin/env python3
"""Reproduce the benchmark tables on the 10x10 torus with k=18.

Writes table1.csv (max link load per scheme and traffic pattern) and
table2.csv (mean hops) into the given output directory, using the default
fixed seed so reruns are byte-identical.
"""

import argparse
import pathlib
import sys

from toruslb.cli import main as cli_main


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--outdir", default="results", type=pathlib.Path)
    parser.add_argument("--trials", type=int, default=1000)
    args = parser.parse_args()
    args.outdir.mkdir(parents=True, exist_ok=True)
    for table in ("table1", "table2"):
        out = args.outdir / f"{table}.csv"
        rc = cli_main([table, "--trials", str(args.trials), "--out", str(out)])
        if rc != 0:
            return rc
        print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
