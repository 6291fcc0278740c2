"""
sweep: solve a model over a grid of budgets or caps.
"""

import argparse
import logging

from ..config import Settings
from ..errors import UsageError
from ..model.io import load_model
from ..program.spec import ProblemSpec
from ..sweep.harness import SweepResult, run_sweep
from ..sweep.plan import SweepParameter, make_plan, parse_grid, parse_variant
from .common import add_output_arguments, budget_arg, format_value, output_stream

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("sweep", help="Solve a model over a parameter grid")
    parser.add_argument("model", help="Model file (JSON)")
    parser.add_argument("--param", required=True, choices=[p.value for p in SweepParameter],
                        help="Swept parameter")
    parser.add_argument("--target", default=None, help="Line 'k-l' for --param line, bus id for --param gen")
    parser.add_argument("--grid", required=True, help="START:STOP:NUM or v1,v2,...")
    parser.add_argument("--variant", action="append", default=None,
                        help="Pinned-zero set, e.g. 1 or 1,2 or none (repeatable)")
    parser.add_argument("--budget", type=budget_arg, default=None,
                        help="Storage budget for cap sweeps (real or 'inf')")
    add_output_arguments(parser, default_format="csv")
    parser.set_defaults(handler=handle)


def _write_text(result: SweepResult, out) -> None:
    frame = result.to_dataframe()
    out.write(frame.to_string(index=False, float_format=lambda v: format_value(float(v))) + "\n")
    for variant in result.variants:
        first = result.first_feasible_index(variant)
        plateau = result.plateau_index(variant)
        out.write(
            f"variant {variant}: first_feasible={first if first is not None else '-'} "
            f"plateau={plateau if plateau is not None else '-'} "
            f"convexity_violations={result.convexity_violations(variant)} "
            f"nonincreasing={'yes' if result.is_nonincreasing(variant) else 'no'}\n"
        )


def handle(args: argparse.Namespace, settings: Settings) -> int:
    net, demand = load_model(args.model)
    grid = parse_grid(args.grid)
    variants = [parse_variant(text) for text in (args.variant or ["none"])]
    if args.param == SweepParameter.BUDGET.value and args.budget is not None:
        raise UsageError("--budget conflicts with --param budget", detail="the grid already sets the budget")

    base = ProblemSpec()
    if args.budget is not None:
        base = base.with_budget(args.budget)
    plan = make_plan(net, demand, args.param, grid, variants, target=args.target, base_spec=base)
    logger.info(f"[CLI] sweep {args.param} over {len(grid)} points, {len(variants)} variants")
    result = run_sweep(plan, settings.solver_config(verbose=args.verbose), workers=settings.threads)

    with output_stream(args.output) as out:
        if args.format == "csv":
            result.write_csv(out)
        else:
            _write_text(result, out)
    return 0
