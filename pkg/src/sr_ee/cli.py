"""Command-line entry point.

Usage: sr-ee individual|asymptotic|pareto --config FILE [--seed S] [--out DIR]

Exit codes: 0 on success, 2 on configuration errors (including unreadable
or schema-invalid files and bad flag values), 3 on solver failures.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

import numpy as np

from .config import ConfigError, load_config
from .convex import SubproblemInfeasible
from .experiments import RUNNERS, write_report
from .individual import DegenerateChannelError
from .numerics import DomainError, NotPSDError
from .pareto import InfeasibleEta

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3

_HELP = {
    "individual": "run both single-operator EE maximizers on sampled channels",
    "asymptotic": "closed-form EE sweeps with optional Monte-Carlo overlays",
    "pareto": "EE-region boundary via bisection over the common target",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sr-ee",
        description="Energy-efficiency region tools for a RIS-assisted "
                    "symbiotic-radio link")
    sub = parser.add_subparsers(dest="kind", required=True,
                                metavar="individual|asymptotic|pareto")
    for kind, help_text in _HELP.items():
        p = sub.add_parser(kind, help=help_text)
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
        p.add_argument("--out", default=None, help="output directory")
        if kind == "pareto":
            p.add_argument("--alpha-grid", default=None,
                           help="comma-separated EE profile weights in (0,1)")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        rc = load_config(args.config, kind=args.kind, seed=args.seed,
                         out_dir=args.out,
                         alpha_grid=getattr(args, "alpha_grid", None))
    except ConfigError as err:
        print(f"sr-ee: config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        report = RUNNERS[args.kind](rc)
    except (InfeasibleEta, SubproblemInfeasible, DegenerateChannelError,
            DomainError, NotPSDError, np.linalg.LinAlgError) as err:
        print(f"sr-ee: solver failure: {err}", file=sys.stderr)
        return EXIT_SOLVER
    try:
        csv_path, json_path = write_report(report, rc.out_dir)
    except OSError as err:
        print(f"sr-ee: cannot write output: {err}", file=sys.stderr)
        return EXIT_CONFIG
    print(csv_path)
    print(json_path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
