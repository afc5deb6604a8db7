"""Command-line entry point: subcommands map, comparison, bic.

Each subcommand reads primary-experiment artifacts (read-only) and writes
one image; inputs are never modified.  Exit codes: 0 success, 2 bad
arguments or schema mismatch.
"""

from __future__ import annotations

import argparse
import sys

from .figures import load_spec, plot_bic, plot_comparison, plot_map
from .schemas import SchemaError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plotkit", description="Render figures from experiment artifacts"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--in", dest="input", required=True, help="input CSV artifact")
        p.add_argument("--out", required=True, help="output image path")
        p.add_argument("--spec", default=None, help="figure spec JSON")

    p = sub.add_parser("map", help="projected heatmap of an intensity map CSV")
    add_common(p)
    p.add_argument("--sidecar", default=None, help="map sidecar JSON (label)")

    p = sub.add_parser("comparison", help="method comparison curves from a summary CSV")
    add_common(p)

    p = sub.add_parser("bic", help="scan profile from a scan CSV")
    add_common(p)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = load_spec(args.spec)
        if args.command == "map":
            out = plot_map(args.input, args.out, spec, sidecar=args.sidecar)
        elif args.command == "comparison":
            out = plot_comparison(args.input, args.out, spec)
        else:
            out = plot_bic(args.input, args.out, spec)
    except (SchemaError, ValueError, OSError) as exc:
        print(f"plotkit error: {exc}", file=sys.stderr)
        return 2
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
