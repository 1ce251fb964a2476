#!/usr/bin/env python3
"""Run the standard rebate-grid experiment and write the sweep CSV.

Full scale by default (10^6 steps, 30 seeds per grid point, the twelve
grid rebates plus the no-fee baseline); expect several hours of CPU time.
Pass --t-end 200000 --seeds 10 for the reduced-scale variant used by the
acceptance tests, or --jobs N to fan runs out over processes.
"""

import argparse
import sys

from makertaker.cli import main


def parse_args() -> argparse.Namespace:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="sweep.csv", help="output CSV path")
    parser.add_argument("--seeds", default="30", help="seed count or comma list")
    parser.add_argument("--t-end", type=int, default=1_000_000)
    parser.add_argument("--jobs", type=int, default=1)
    return parser.parse_args()


if __name__ == "__main__":
    args = parse_args()
    sys.exit(main([
        "sweep",
        "--seeds", args.seeds,
        "--t-end", str(args.t_end),
        "--jobs", str(args.jobs),
        "--out", args.out,
    ]))
