import argparse
import logging
import sys
from typing import Optional, Sequence

import structlog

from .config import settings
from .commands import diagnose, diagram, evolve, run


def configure_logging():
    """Structured logs on stderr; stdout carries command output"""
    logging.basicConfig(
        format="%(message)s",
        stream=sys.stderr,
        level=getattr(logging, settings.log_level.upper(), logging.INFO),
    )

    renderer = (
        structlog.dev.ConsoleRenderer()
        if settings.log_format == "console"
        else structlog.processors.JSONRenderer()
    )
    structlog.configure(
        processors=[
            structlog.stdlib.filter_by_level,
            structlog.stdlib.add_logger_name,
            structlog.stdlib.add_log_level,
            structlog.stdlib.PositionalArgumentsFormatter(),
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            structlog.processors.UnicodeDecoder(),
            renderer,
        ],
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        cache_logger_on_first_use=True,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="python -m app.main",
        description=settings.app_name,
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in (run, diagnose, diagram, evolve):
        command.add_parser(subparsers)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    configure_logging()
    args = build_parser().parse_args(argv)
    logger = structlog.get_logger()
    logger.info("command started", command=args.command)
    code = args.handler(args)
    logger.info("command finished", command=args.command, exit_code=code)
    return code


if __name__ == "__main__":
    sys.exit(main())
