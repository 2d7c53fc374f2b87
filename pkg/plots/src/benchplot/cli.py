"""benchplot command line: curves | hist | accept."""

from __future__ import annotations

import argparse
import sys

from .figures import FigureSpec, render
from .schema import SchemaError

_KIND_BY_COMMAND = {"curves": "curves", "hist": "histogram", "accept": "acceptance"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="benchplot",
        description="Render figures from corrclust benchmark CSVs",
    )
    subs = parser.add_subparsers(dest="command", required=True)
    for command in _KIND_BY_COMMAND:
        p = subs.add_parser(command)
        p.add_argument("--in", dest="inputs", nargs="+", required=True,
                       help="input CSV file(s)")
        p.add_argument("--out", required=True, help="output image path")
        p.add_argument("--group", nargs="*", default=None,
                       help="grouping column names")
        p.add_argument("--xlabel")
        p.add_argument("--ylabel")
        p.add_argument("--raster", action="store_true",
                       help="write PNG instead of SVG")
        if command == "accept":
            p.add_argument("--beta-min", type=float, default=1.0)
            p.add_argument("--beta-max", type=float, default=8.0)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = FigureSpec(
        inputs=args.inputs,
        kind=_KIND_BY_COMMAND[args.command],
        out=args.out,
        group_keys=args.group or [],
        xlabel=args.xlabel,
        ylabel=args.ylabel,
        raster=args.raster,
    )
    if args.command == "accept":
        spec.beta_window = (args.beta_min, args.beta_max)
    try:
        print(render(spec))
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
