"""Command-line entry point.

Subcommands: boundary, aperture, capacity, optimize, complexity, and
experiment <figN>. Exit codes: 0 success, 2 configuration error, 3 numerical
failure.
"""

from __future__ import annotations

import argparse
import sys

from .config import ScenarioConfig, load_config
from .errors import ConfigError
from .experiments import run_experiment

FIGURES = ("fig2", "fig3", "fig4", "fig5", "fig6", "fig7")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None,
                        help="scenario config path (JSON; '-' for stdin; "
                             "omit for the built-in defaults)")
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--seed", type=int, default=None, help="override fading.seed")
    common.add_argument("--trials", type=int, default=None, help="override fading.trials")
    common.add_argument("--format", choices=("csv", "json", "both"), default="both",
                        help="delimited output format(s)")
    common.add_argument("--no-plot", action="store_true",
                        help="skip PNG rendering next to the data files")

    parser = argparse.ArgumentParser(
        prog="dpmimo",
        description="Dual-polarized XL-MIMO boundaries, capacity, and "
                    "transmit covariance optimization")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("boundary", "aperture", "capacity", "optimize", "complexity"):
        sub.add_parser(name, parents=[common],
                       help=f"run the {name} computation at the config scenario")
    exp = sub.add_parser("experiment", parents=[common],
                         help="reproduce a published figure sweep")
    exp.add_argument("figure", choices=FIGURES)
    return parser


def _load(args) -> ScenarioConfig:
    if args.config == "-":
        config = load_config(text=sys.stdin.read())
    elif args.config is not None:
        config = load_config(path=args.config)
    else:
        config = load_config()
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.trials is not None:
        overrides["trials"] = args.trials
    if overrides:
        config = config.replace(fading=overrides)
    return config


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    name = args.figure if args.command == "experiment" else args.command
    try:
        config = _load(args)
        written = run_experiment(name, config, args.out, fmt=args.format,
                                 plot=not args.no_plot)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return 2
    except Exception as e:  # numerical / model-domain failures
        print(f"numerical failure: {type(e).__name__}: {e}", file=sys.stderr)
        return 3
    for kind, path in sorted(written.items()):
        print(f"{kind}: {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
