"""Command-line interface.

Subcommands:
  run              sweep rate regions per the config and write the rows CSV
  summarize        ensemble-average a rows CSV into a frontier CSV
  validate-config  parse and validate a config file

Exit codes: 0 success, 1 validation/config error, 2 runtime or I/O error.
"""
from __future__ import annotations

import argparse
import sys
from typing import List, Optional

from .config import SCHEMES
from .exceptions import ConfigError
from .harness import load_config, run_experiment, summarize


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="risrsma",
        description="RIS-aided RSMA rate-region simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run the configured experiment")
    run_p.add_argument("--config", required=True, help="YAML config file")
    run_p.add_argument(
        "--schemes",
        help=f"comma-separated subset of {','.join(SCHEMES)} "
        "(default: the config's scheme)",
    )
    run_p.add_argument(
        "--arch",
        help="comma-separated architectures: single|group:<sizes>|fully|none "
        "(default: the config's arch)",
    )
    run_p.add_argument("--seed", type=int, help="override the master seed")
    run_p.add_argument("--mc-runs", type=int, help="override the run count")
    run_p.add_argument("--out", default="region_rows.csv", help="output CSV")
    run_p.add_argument(
        "--jobs", type=int, default=1, help="parallel worker processes"
    )

    sum_p = sub.add_parser("summarize", help="average runs into a frontier CSV")
    sum_p.add_argument("--in", dest="in_path", required=True)
    sum_p.add_argument("--out", dest="out_path", required=True)

    val_p = sub.add_parser("validate-config", help="check a config file")
    val_p.add_argument("--config", required=True)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "validate-config":
            cfg = load_config(args.config)
            print(f"OK: {args.config} (scheme={cfg.scheme}, arch={cfg.arch})")
            return 0
        if args.command == "run":
            cfg = load_config(args.config)
            overrides = {}
            if args.seed is not None:
                overrides["seed"] = args.seed
            if args.mc_runs is not None:
                overrides["mc_runs"] = args.mc_runs
            if overrides:
                cfg = cfg.with_(**overrides)
            schemes = (
                [s.strip() for s in args.schemes.split(",") if s.strip()]
                if args.schemes else [cfg.scheme]
            )
            archs = (
                [a.strip() for a in args.arch.split(",") if a.strip()]
                if args.arch else [cfg.arch]
            )
            points = run_experiment(
                cfg, schemes, archs, args.out, jobs=args.jobs
            )
            print(f"wrote {len(points)} rows to {args.out}")
            return 0
        if args.command == "summarize":
            rows = summarize(args.in_path, args.out_path)
            print(f"wrote {len(rows)} frontier rows to {args.out_path}")
            return 0
        raise AssertionError(f"unhandled command {args.command}")
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - map everything else to code 2
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
