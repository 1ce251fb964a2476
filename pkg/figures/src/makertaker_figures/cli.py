"""Command-line entry point: render sweep figures from a results CSV."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .plots import SweepFormatError, render_standard_set


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="figures",
        description=(
            "Render the rebate-sweep result figures (volatility, market "
            "impact, market inefficiency, and total taker cost against the "
            "maker rebate) from a sweep CSV."
        ),
    )
    parser.add_argument(
        "sweep_csv", type=Path, help="CSV written by the sweep command"
    )
    parser.add_argument(
        "--out-dir",
        type=Path,
        default=Path("."),
        help="directory for the rendered images (default: current directory)",
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if not args.sweep_csv.exists():
        print(f"figures: {args.sweep_csv}: no such file", file=sys.stderr)
        return 2
    try:
        written = render_standard_set(args.sweep_csv, args.out_dir)
    except SweepFormatError as exc:
        print(f"figures: {exc}", file=sys.stderr)
        return 2
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
