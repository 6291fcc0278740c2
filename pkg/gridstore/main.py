"""
Command-line entry point.

    python -m gridstore [-v] <verb> ...

Exit codes: 0 success, 1 usage/parse/validation/verification error,
2 infeasible model.
"""

import argparse
import logging
import sys
from typing import List, Optional

from . import __version__
from .commands import register_all
from .config import get_settings
from .errors import GridstoreError, UsageError
from .logging_setup import configure_logging

logger = logging.getLogger(__name__)

EXIT_ERROR = 1


class GridstoreArgumentParser(argparse.ArgumentParser):
    """ArgumentParser that reports bad arguments as UsageError instead of exiting."""

    def error(self, message: str):
        raise UsageError(message, detail=self.prog)


def build_parser() -> argparse.ArgumentParser:
    """Build the top-level parser with every verb registered."""
    parser = GridstoreArgumentParser(
        prog="gridstore",
        description="Optimal storage placement on DC power-flow networks",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="Log debug output, including the solver trace")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="verb", metavar="VERB")
    subparsers.required = True
    register_all(subparsers)
    return parser


def _report_error(error: GridstoreError) -> None:
    print(error.to_response().to_line(), file=sys.stderr)
    for suggestion in error.suggestions:
        print(f"hint: {suggestion}", file=sys.stderr)


def run(argv: Optional[List[str]] = None) -> int:
    """
    Run the CLI.

    Args:
        argv: Arguments without the program name (sys.argv[1:] by default)

    Returns:
        Process exit code
    """
    settings = get_settings()
    configure_logging(settings.log_level, settings.log_format)
    try:
        args = build_parser().parse_args(argv)
        if args.verbose:
            configure_logging("DEBUG", settings.log_format)
        logger.debug(f"[CLI] {args.verb} with {settings.threads} threads")
        return args.handler(args, settings)
    except GridstoreError as e:
        _report_error(e)
        return EXIT_ERROR
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_ERROR
    except OSError as e:
        print(f"error [USAGE_ERROR]: {e}", file=sys.stderr)
        return EXIT_ERROR


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
