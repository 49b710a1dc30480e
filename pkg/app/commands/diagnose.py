import argparse
import logging
from pathlib import Path

from ..exceptions import BranchFileError
from ..services.run_service import RunService
from . import EXIT_CONFIG_ERROR, EXIT_DIAGNOSTIC_FAILURE, EXIT_OK

logger = logging.getLogger(__name__)

run_service = RunService()


def add_parser(subparsers):
    parser = subparsers.add_parser("diagnose", help="run the diagnostic suite over stored branch files")
    parser.add_argument("branches", nargs="+", help="branch files")
    parser.add_argument("--tol-inf", type=float, default=None, help="Newton tolerance the branches were computed with")
    parser.add_argument("--out", default=None, help="write the JSON report here instead of stdout")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    try:
        report = run_service.diagnose_files(args.branches, args.tol_inf)
    except (OSError, BranchFileError) as e:
        logger.error(f"Cannot read branch file: {e}")
        return EXIT_CONFIG_ERROR

    text = report.model_dump_json(indent=2)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text)
    else:
        print(text)

    if not report.passed:
        logger.error(f"Diagnostics failed: {', '.join(report.failures)}")
        return EXIT_DIAGNOSTIC_FAILURE
    return EXIT_OK
