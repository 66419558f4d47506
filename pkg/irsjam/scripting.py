"""
Command-line parsers for the simulator front end and helper scripts.
"""

import logging
logger = logging.getLogger()

import os
from argparse import ArgumentParser, RawDescriptionHelpFormatter

__all__ = ['BasicParser', 'add_run_arguments', 'OUT_DIR_ENV']

#: Environment variable naming the default output directory
OUT_DIR_ENV = "IRSJAM_OUT_DIR"


class BasicParser(ArgumentParser):
    """ Custom wrapper for `ArgumentParser` class which adds some
    default parsing options, including:

        -d, --debug      Enable debug/verbose logging

    """

    def __init__(self, description="Default program", **kwargs):

        super(BasicParser, self).__init__(
            description=description,
            formatter_class=RawDescriptionHelpFormatter,
            **kwargs
        )

        self.add_argument("-d", "--debug", action='store_true',
                          help="Enable debug/verbose logging")

        # Default configuration of logger (will only reset root
        # logger as long as it hasn't been previously configured)
        logging.basicConfig(level=logging.INFO, format="%(message)s")

    def parse_args(self, args=None, namespace=None):

        args = super(BasicParser, self).parse_args(
            args=args, namespace=namespace
        )

        # Enable logger debug statements
        if args.debug:
            logger.setLevel(logging.DEBUG)

        return args


def add_run_arguments(parser):
    """ Options shared by every subcommand that resolves a scenario. """
    parser.add_argument("--config", metavar="PATH",
                        help="Scenario file (section.key = value lines)")
    parser.add_argument("--set", metavar="KEY=VALUE", action="append",
                        default=[], dest="overrides",
                        help="Override one scenario key; repeatable")
    parser.add_argument("--seed", type=int,
                        help="Master seed (experiment.master_seed)")
    parser.add_argument("--trials", type=int,
                        help="Trials per point (experiment.n_trials)")
    parser.add_argument("--schemes",
                        help="Comma-separated subset of schemes to run")
    parser.add_argument("--parallel", type=int, default=1, metavar="N",
                        help="Worker processes (default: 1)")
    parser.add_argument("--out", default=os.environ.get(OUT_DIR_ENV, "."),
                        metavar="DIR",
                        help="Output directory (default: $%s or '.')"
                             % OUT_DIR_ENV)
    parser.add_argument("--netcdf", action="store_true",
                        help="Also save per-trial results as netCDF")
    return parser
