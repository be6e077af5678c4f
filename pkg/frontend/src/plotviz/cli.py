"""Command line: plotviz plot --panel-a a.csv --panel-b b.csv --out fig.png

The output format follows the file extension (png/pdf/svg/...).
Exit codes: 0 success, 1 data/selection error, 2 I/O or rendering error.
"""
from __future__ import annotations

import argparse
import sys
from typing import List, Optional

from .render import PlotDataError, PlotSpec, render


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plotviz", description="rate-region figure renderer"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    plot_p = sub.add_parser("plot", help="render the two-panel figure")
    plot_p.add_argument("--panel-a", required=True, help="frontier CSV, left panel")
    plot_p.add_argument("--panel-b", required=True, help="frontier CSV, right panel")
    plot_p.add_argument("--out", required=True, help="output image path")
    plot_p.add_argument(
        "--series",
        help="comma-separated scheme:arch pairs to draw "
        "(default: every series in the CSV)",
    )
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    series = None
    if args.series is not None:
        series = []
        for tok in args.series.split(","):
            tok = tok.strip()
            if not tok:
                continue
            if ":" not in tok:
                print(
                    f"error: series {tok!r} must look like scheme:arch",
                    file=sys.stderr,
                )
                return 1
            scheme, arch = tok.split(":", 1)
            series.append((scheme, arch))
    spec = PlotSpec(
        panel_a=args.panel_a, panel_b=args.panel_b, out_path=args.out,
        series=series,
    )
    try:
        plotted = render(spec)
    except PlotDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    n = len(plotted["a"])
    print(f"wrote {args.out} ({n} series per panel)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
