import argparse
import logging

from ..exceptions import BranchFileError
from ..utils.branch_io import read_branch
from ..utils.plotting import emit_diagram
from . import EXIT_CONFIG_ERROR, EXIT_OK

logger = logging.getLogger(__name__)


def add_parser(subparsers):
    parser = subparsers.add_parser("diagram", help="plot L2 norm against eps for branch files")
    parser.add_argument("branches", nargs="+", help="branch files")
    parser.add_argument("--out", required=True, help="output path; .csv and .svg are written next to each other")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    try:
        branches = [read_branch(path) for path in args.branches]
    except (OSError, BranchFileError) as e:
        logger.error(f"Cannot read branch file: {e}")
        return EXIT_CONFIG_ERROR

    csv_path, svg_path = emit_diagram(branches, args.out)
    print(f"{csv_path}\n{svg_path}")
    return EXIT_OK
