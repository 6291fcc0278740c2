"""
Logging configuration.

Plain text lines by default; JSON records (python-json-logger) when the
log format is set to "json".
"""

import logging
import sys
from typing import Optional, TextIO

from pythonjsonlogger import jsonlogger

TEXT_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
JSON_FORMAT = '%(asctime)s %(name)s %(levelname)s %(message)s'

_handler: Optional[logging.Handler] = None


def configure_logging(
    level: str = "INFO",
    fmt: str = "text",
    stream: Optional[TextIO] = None,
) -> logging.Handler:
    """
    Install the package log handler on the root ``gridstore`` logger.

    Calling this again replaces the previously installed handler.

    Args:
        level: Logging level name
        fmt: "text" or "json"
        stream: Target stream (stderr by default)

    Returns:
        The installed handler
    """
    global _handler

    root = logging.getLogger("gridstore")
    if _handler is not None:
        root.removeHandler(_handler)

    handler = logging.StreamHandler(stream or sys.stderr)
    if fmt == "json":
        handler.setFormatter(jsonlogger.JsonFormatter(JSON_FORMAT))
    else:
        handler.setFormatter(logging.Formatter(TEXT_FORMAT))

    root.addHandler(handler)
    root.setLevel(getattr(logging, level.upper(), logging.INFO))
    _handler = handler
    return handler
