"""
app.py

Entry point for the dentfit command-line tool.
Configures logging, reads settings, registers commands, and dispatches them
through the command logging middleware.

This application follows a modular architecture:
- Commands are defined in `commands/` modules.
- Schemas are located in `models/`.
- Computation lives in `services/`.
- Middleware, configuration and errors are in `framework/`.

Exit codes:
    0: success with at least one dent
    1: any failure
    2: success, but no dent was found

Environment Variables:
    See `framework.config`. `TESTING="true"` disables OpenTelemetry log export.
"""

import argparse
import logging
import sys
from typing import List, Optional

from framework.config import Settings, load_settings
from framework.errors import DentFitError
from framework.middleware import CommandLoggingMiddleware, configure_logging
from commands import compare, fit, render, srm, synth
from commands.common import EXIT_FAILURE

logger = logging.getLogger(__name__)

COMMANDS = (synth, fit, compare, srm, render)


class DentFitParser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with 1, like every other failure."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_FAILURE, f"{self.prog}: error: {message}\n")


def build_parser(settings: Settings) -> argparse.ArgumentParser:
    parser = DentFitParser(
        prog="dentfit",
        description="Fit a seven-parameter dent model to 3D scans of aircraft skin.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for command in COMMANDS:
        command.register(subparsers, settings)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """
    Run one dentfit command.

    Args:
        argv (list[str], optional): Arguments without the program name.
            Defaults to `sys.argv[1:]`.

    Returns:
        int: The process exit code.
    """
    try:
        settings = load_settings()
    except EnvironmentError as e:
        print(f"dentfit: error: {e}", file=sys.stderr)
        return EXIT_FAILURE

    configure_logging(settings.log_level, testing=settings.testing)
    args = build_parser(settings).parse_args(argv)
    arguments = {k: v for k, v in vars(args).items() if k != "handler"}

    try:
        return CommandLoggingMiddleware().dispatch(
            args.command, arguments, lambda: args.handler(args, settings)
        )
    except (DentFitError, OSError, ValueError) as e:
        # ValueError covers pydantic validation and malformed JSON
        logger.error(f"{args.command} failed: {e}")
        print(f"dentfit {args.command}: error: {e}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
