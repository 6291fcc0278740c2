"""
analytic: closed-form thresholds of an SGSL or star model.
"""

import argparse

from ..analytic.sgsl import analyze_sgsl
from ..analytic.star import analyze_star
from ..config import Settings
from ..errors import AnalyticError, ErrorCode
from ..model.io import load_model
from ..model.topology import resolve_topology
from ..model.types import TopologyKind
from ..program.spec import ProblemSpec
from .common import add_output_arguments, apply_overrides, budget_arg, output_stream, write_rows


def register(subparsers) -> None:
    parser = subparsers.add_parser("analytic", help="Closed-form f_min, h_min and h_sat of an SGSL or star model")
    parser.add_argument("model", help="Model file (JSON)")
    parser.add_argument("--budget", type=budget_arg, default=None, help="Storage budget h (real or 'inf')")
    parser.add_argument("--override", action="append", default=[],
                        help="Cap override f_K-L=V or g_K=V (repeatable)")
    add_output_arguments(parser)
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace, settings: Settings) -> int:
    net, demand = load_model(args.model)
    spec = apply_overrides(ProblemSpec(), args.override)
    if args.budget is not None:
        spec = spec.with_budget(args.budget)

    topology = resolve_topology(net)
    if topology == TopologyKind.SGSL:
        report = analyze_sgsl(net, demand, spec)
    elif topology == TopologyKind.STAR:
        report = analyze_star(net, demand, spec)
    else:
        raise AnalyticError(
            "Closed forms cover SGSL and star networks only",
            error_code=ErrorCode.TOPOLOGY_UNSUPPORTED,
            detail=f"model has {len(net.buses)} buses and {len(net.generator_ids)} generators",
            suggestions=["Use the solve or sweep verbs on general networks"],
        )

    with output_stream(args.output) as out:
        write_rows(report.rows(), args.format, out)
    return 0
