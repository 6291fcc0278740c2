"""
Command-line verbs.

Each module exposes ``register(subparsers)``, which adds its parser(s) and
binds a ``handler(args, settings) -> int`` through ``set_defaults``.
"""

from typing import Callable, Dict

from . import analytic, solve, sweep, verify

COMMANDS: Dict[str, Callable] = {
    "solve": solve.register,
    "analytic": analytic.register,
    "sweep": sweep.register,
    "verify": verify.register,
}


def register_all(subparsers) -> None:
    """Add every verb to an argparse subparsers action."""
    for register in COMMANDS.values():
        register(subparsers)


__all__ = ["COMMANDS", "register_all"]
