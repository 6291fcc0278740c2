"""
verify-theorem1 and counterexample: the randomized and worked checks of
single-connection storage placement.
"""

import argparse

from ..config import Settings
from ..errors import ErrorCode, VerificationError
from ..sweep.campaigns import verify_counterexample, verify_theorem1
from .common import budget_arg, cap_arg, format_value


def register(subparsers) -> None:
    theorem = subparsers.add_parser(
        "verify-theorem1",
        help="Check on random networks that single-connection generators need no storage",
    )
    theorem.add_argument("--seed", type=int, default=0, help="Campaign seed (default: 0)")
    theorem.add_argument("--trials", type=int, default=200, help="Number of random instances (default: 200)")
    theorem.add_argument("--max-buses", type=int, default=None, help="Upper bound on bus count")
    theorem.add_argument("--max-period", type=int, default=None, help="Upper bound on period T")
    theorem.set_defaults(handler=handle_theorem)

    counter = subparsers.add_parser("counterexample", help="Solve the three-bus star with and without storage at bus 1")
    counter.add_argument("--line-cap", type=cap_arg, default=9.5, help="Cap of both lines (default: 9.5)")
    counter.add_argument("--budget", type=budget_arg, default=5.0, help="Storage budget (default: 5)")
    counter.set_defaults(handler=handle_counterexample)


def handle_theorem(args: argparse.Namespace, settings: Settings) -> int:
    report = verify_theorem1(
        seed=args.seed,
        trials=args.trials,
        max_buses=args.max_buses,
        max_period=args.max_period,
        solver_config=settings.solver_config(verbose=args.verbose),
        workers=settings.threads,
        cfg=settings.instances,
    )
    for outcome in report.outcomes:
        if outcome.status == "skipped":
            print(f"trial {outcome.trial}: skipped ({outcome.reason})")
        elif outcome.status == "failed":
            print(
                f"trial {outcome.trial}: FAILED p*={format_value(outcome.p_star)} "
                f"pi*={format_value(outcome.pi_star)} ({outcome.reason})"
            )
        if outcome.transfer_ok is False:
            print(f"trial {outcome.trial}: construction check FAILED ({outcome.transfer_reason})")
    print(report.summary())
    if not report.ok:
        raise VerificationError(
            f"{report.failed} of {len(report.outcomes)} trials violate p* = pi*, "
            f"{report.transfer_failures} construction checks failed",
            error_code=ErrorCode.VERIFICATION_FAILED,
            detail=f"seed={report.seed}",
        )
    return 0


def handle_counterexample(args: argparse.Namespace, settings: Settings) -> int:
    report = verify_counterexample(
        line_cap=args.line_cap,
        budget=args.budget,
        solver_config=settings.solver_config(verbose=args.verbose),
    )
    print(f"p_star: {report.p_star:.6f}")
    print(f"pi_star: {report.pi_star:.6f}")
    print(f"gap: {report.gap:.6f}")
    return 0
