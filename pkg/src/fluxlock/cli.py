"""Command-line entry point.

Exit codes: 0 success, 2 bad command line (argparse), 3 invalid
configuration, 4 numerical divergence during the run.
"""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .loop import LoopDivergenceError
from .scenarios import SCENARIOS, ConfigError, run_scenario

EXIT_CONFIG = 3
EXIT_DIVERGED = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fluxlock",
        description="Simulate closed-loop qubit-frequency stabilization "
        "and write delimited results (and optional figures) to a directory.",
    )
    parser.add_argument("scenario", choices=SCENARIOS, help="scenario to run")
    parser.add_argument("--config", metavar="PATH", help="INI configuration file")
    parser.add_argument("--seed", type=int, metavar="U64", help="master RNG seed")
    parser.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="SECTION.KEY=VALUE",
        dest="overrides",
        help="override one configuration value (repeatable)",
    )
    parser.add_argument("--out", default=".", metavar="DIR", help="output directory")
    parser.add_argument("--workers", type=int, metavar="N",
                        help="worker processes for ensemble runs")
    parser.add_argument("--plot", action="store_true",
                        help="also render PNG figures from the CSV outputs")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        files = run_scenario(
            args.scenario,
            config_path=args.config,
            overrides=args.overrides,
            out_dir=args.out,
            seed=args.seed,
            workers=args.workers,
        )
    except ConfigError as exc:
        for err in exc.errors:
            print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (LoopDivergenceError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED

    for name in files:
        print(name)
    if args.plot:
        from . import plots

        for path in plots.render(args.scenario, args.out):
            print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
