#!/usr/bin/env python3
"""
Command-line front end for the radial Euler-Poisson toolkit

    python cli.py period-table --dim 4 --samples 100
    python cli.py period-table --all-dims 2..6
    python cli.py expansion-check --all-dims 2..6
    python cli.py generate --family compliant --dim 3 --out data
    python cli.py check --input data/compliant_d3.csv --dim 3
    python cli.py simulate --mode bulk --family compliant --dim 3
    python cli.py simulate --crossing-demo

Options are read from the ``run`` section of the YAML configuration and
overridden by flags given on the command line.
"""
import argparse
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from src.cli.commands import COMMAND_HANDLERS
from src.cli.run_config import RunConfig
from src.errors import RadialEPError
from src.utils.config_utils import load_config, setup_logging

logger = logging.getLogger(__name__)


def _common_flags() -> argparse.ArgumentParser:
    # SUPPRESS keeps absent flags out of the namespace so config values survive
    flags = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    flags.add_argument('--config', help="YAML configuration file merged over config.yaml")
    flags.add_argument('--dim', type=int, help="spatial dimension d >= 2")
    flags.add_argument('--mass', type=float, help="enclosed mass m of the effective potential")
    flags.add_argument('--tol', type=float, help="relative tolerance of quadrature and ODE solves")
    flags.add_argument('--samples', type=int, help="energy samples per period table")
    flags.add_argument('--out', help="output directory")
    flags.add_argument('--emin-offset-min', dest='emin_offset_min', type=float)
    flags.add_argument('--emin-offset-max', dest='emin_offset_max', type=float)
    flags.add_argument('--all-dims', dest='all_dims', metavar='A..B', help="inclusive dimension range")
    return flags


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = argparse.ArgumentParser(
        prog='radial-ep',
        description="Period analysis, data classification and characteristic simulation "
                    "for the radial pressureless Euler-Poisson system"
    )
    sub = parser.add_subparsers(dest='command', required=True)

    table = sub.add_parser('period-table', parents=[common], help="tabulate T(E) above e_min")
    table.add_argument('--normalized', action='store_true', default=argparse.SUPPRESS,
                       help="use the normalized potential V_d (r* = 1, e_min = 0)")

    expansion = sub.add_parser('expansion-check', parents=[common],
                               help="compare T'(E) near e_min with pi c_V / d^(7/2)")
    expansion.add_argument('--expansion-offset', dest='expansion_offset', type=float,
                           default=argparse.SUPPRESS, help="E - e_min of the comparison")

    fixture = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    fixture.add_argument('--family', choices=('stationary', 'compliant', 'perturbed', 'blowup'))
    fixture.add_argument('--c0-offset', dest='c0_offset', type=float, help="C0 - C_min")
    fixture.add_argument('--shape', type=float, help="mass shape parameter B")
    fixture.add_argument('--alpha', type=float, help="velocity perturbation strength")
    fixture.add_argument('--radius', type=float, help="support radius R0")
    fixture.add_argument('--nodes', type=int, help="grid nodes")

    check = sub.add_parser('check', parents=[common], help="classify an initial-data profile")
    check.add_argument('--input', help="profile CSV with header r,P0,u0")

    sub.add_parser('generate', parents=[common, fixture], help="write a fixture profile")

    simulate = sub.add_parser('simulate', parents=[common, fixture], help="integrate characteristics",
                              argument_default=argparse.SUPPRESS)
    simulate.add_argument('--mode', choices=('orbit', 'pw', 'bulk'))
    simulate.add_argument('--input', help="profile CSV for pw and bulk runs")
    simulate.add_argument('--t-end', dest='t_end', type=float)
    simulate.add_argument('--t-max', dest='t_max', type=float, help="horizon of the crossing demo")
    simulate.add_argument('--emin-offset', dest='emin_offset', type=float, help="E - e_min of the orbit")
    simulate.add_argument('--crossing-demo', dest='crossing_demo', action='store_true')
    simulate.add_argument('--label-count', dest='label_count', type=int)
    simulate.add_argument('--label-radius', dest='label_radius', type=float)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = vars(parser.parse_args(argv))
    except SystemExit as e:
        return int(e.code or 0)

    config_path = args.pop('config', None)
    try:
        config = load_config(config_path)
    except (FileNotFoundError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    setup_logging(config)

    command = args['command']
    try:
        run = RunConfig(**{**config.get('run', {}), **args})
    except ValidationError as e:
        print(f"error: invalid options for {command}:\n{e}", file=sys.stderr)
        return 1

    logger.info(f"Running {command} (d={run.dim}, tol={run.tol:g}, out={run.out})")
    try:
        return COMMAND_HANDLERS[command](run, config)
    except RadialEPError as e:
        logger.error(f"{command} failed: {e}", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == '__main__':
    sys.exit(main())
