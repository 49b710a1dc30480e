import argparse
import asyncio
import logging

from ..exceptions import ConfigError, ContinuationToolkitError
from ..services.run_service import RunService
from . import EXIT_CONFIG_ERROR, EXIT_DIAGNOSTIC_FAILURE, EXIT_OK

logger = logging.getLogger(__name__)

# Service instances
run_service = RunService()


def add_parser(subparsers):
    parser = subparsers.add_parser("run", help="trace the configured branches and verify them")
    parser.add_argument("config", help="JSON run configuration")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    """Trace, write outputs, run diagnostics; 0 iff every hard check passes"""
    try:
        config = run_service.load_config(args.config)
    except ConfigError as e:
        logger.error(str(e))
        return EXIT_CONFIG_ERROR

    try:
        report = asyncio.run(run_service.run(config))
    except ContinuationToolkitError as e:
        logger.error(f"Run failed: {e}")
        return EXIT_DIAGNOSTIC_FAILURE

    print(report.model_dump_json(indent=2, exclude={"branches": {"__all__": {"trend"}}}))
    if not report.passed:
        logger.error(f"Diagnostics failed: {', '.join(report.failures)}")
        return EXIT_DIAGNOSTIC_FAILURE
    return EXIT_OK
