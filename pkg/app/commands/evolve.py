import argparse
import asyncio
import logging

from ..exceptions import BlowupDetected, ConfigError
from ..services.run_service import RunService
from . import EXIT_CONFIG_ERROR, EXIT_DIAGNOSTIC_FAILURE, EXIT_OK

logger = logging.getLogger(__name__)

run_service = RunService()


def add_parser(subparsers):
    parser = subparsers.add_parser("evolve", help="integrate the time-dependent problem for the configured runs")
    parser.add_argument("config", help="JSON run configuration with an evolution section")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    try:
        config = run_service.load_config(args.config)
    except ConfigError as e:
        logger.error(str(e))
        return EXIT_CONFIG_ERROR

    if not config.evolution:
        logger.error("Config has no evolution runs")
        return EXIT_CONFIG_ERROR

    try:
        report = asyncio.run(run_service.evolve(config))
    except BlowupDetected as e:
        logger.error(f"Evolution blew up: {e}")
        return EXIT_DIAGNOSTIC_FAILURE

    print(report.model_dump_json(indent=2))
    return EXIT_OK
