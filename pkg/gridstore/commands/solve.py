"""
solve: build and solve one storage placement program.
"""

import argparse
import logging
import sys
from typing import List, Tuple

import pandas as pd

from ..analytic.constructions import purify, transfer_storage
from ..config import Settings
from ..errors import SolverError
from ..model.io import load_model
from ..model.topology import classify_buses
from ..program.builder import build
from ..program.spec import ProblemSpec
from ..solver.base import Solution, SolverStatus
from ..solver.ipm import solve
from .common import (
    FLOAT_FORMAT,
    add_output_arguments,
    apply_overrides,
    budget_arg,
    format_value,
    infeasibility_hints,
    output_stream,
    pinned_arg,
    write_rows,
)

logger = logging.getLogger(__name__)

EXIT_INFEASIBLE = 2


def register(subparsers) -> None:
    parser = subparsers.add_parser("solve", help="Solve the storage placement program of a model")
    parser.add_argument("model", help="Model file (JSON)")
    parser.add_argument("--budget", type=budget_arg, default=None, help="Storage budget h (real or 'inf')")
    parser.add_argument("--pin-zero", type=pinned_arg, default=frozenset(),
                        help="Generator buses with zero storage, e.g. 1,2")
    parser.add_argument("--override", action="append", default=[],
                        help="Cap override f_K-L=V or g_K=V (repeatable)")
    parser.add_argument("--net-storage", action="store_true", help="Use one net charging variable per bus")
    parser.add_argument("--dump-program", default=None, help="Write the program matrices as triplets")
    parser.add_argument("--purify-transfer", action="store_true",
                        help="Move storage off every single-connection generator after solving")
    add_output_arguments(parser)
    parser.set_defaults(handler=handle)


def _solution_rows(sol: Solution) -> List[Tuple[str, object]]:
    rows: List[Tuple[str, object]] = [
        ("status", sol.status.value),
        ("objective", sol.objective),
        ("iterations", sol.iterations),
        ("max_residual", sol.max_residual()),
    ]
    for bus, value in sol.capacities().items():
        rows.append((f"b[{bus}]", value))
    return rows


def _profile_frame(sol: Solution) -> pd.DataFrame:
    program = sol.program
    net = program.network
    levels = sol.storage_levels()
    records = []
    for position, bus in enumerate(net.bus_ids):
        gamma = sol.profile("gamma", bus)
        delta = sol.profile("delta", bus)
        g = sol.profile("g", bus) if bus in net.generator_ids else None
        for t in range(program.period):
            records.append({
                "bus": bus,
                "t": t + 1,
                "g": float(g[t]) if g is not None else 0.0,
                "gamma": float(gamma[t]),
                "delta": float(delta[t]),
                "s": float(levels[position, t]),
            })
    return pd.DataFrame(records, columns=["bus", "t", "g", "gamma", "delta", "s"])


def _write_solution(sol: Solution, fmt: str, out) -> None:
    if fmt == "csv":
        frame = _profile_frame(sol)
        out.write("# " + ", ".join(f"{name}={format_value(value)}" for name, value in _solution_rows(sol)) + "\n")
        frame.to_csv(out, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        return
    for name, value in _solution_rows(sol):
        if name == "objective":
            out.write(f"objective: {value:.6f}\n")
        else:
            out.write(f"{name}: {format_value(value)}\n")


def _purify_and_transfer(net, sol: Solution) -> Solution:
    current = sol
    for bus in sorted(classify_buses(net).single_connection):
        program = current.program
        current = purify(net, program.demand, program.spec, current, bus)
        current = transfer_storage(net, current, bus)
        logger.info(f"[CLI] storage of bus {bus} moved; objective {current.objective:.10g}")
    return current


def handle(args: argparse.Namespace, settings: Settings) -> int:
    net, demand = load_model(args.model)
    spec = ProblemSpec(pinned_zero=args.pin_zero, net_storage=args.net_storage)
    if args.budget is not None:
        spec = spec.with_budget(args.budget)
    spec = apply_overrides(spec, args.override)

    program = build(net, demand, spec)
    if args.dump_program:
        with open(args.dump_program, "w", encoding="utf-8") as handle_:
            program.dump_triplets(handle_)
    logger.info(f"[CLI] {program.summary()}")

    sol = solve(program, settings.solver_config(verbose=args.verbose))
    if sol.status == SolverStatus.INFEASIBLE:
        with output_stream(args.output) as out:
            rows: List[Tuple[str, object]] = [("status", sol.status.value)]
            if sol.certificate is not None:
                rows.append(("phase1_violation", sol.certificate.phase1_objective))
            write_rows(rows, args.format, out)
        for hint in infeasibility_hints(net, demand, spec):
            print(f"hint: {hint}", file=sys.stderr)
        return EXIT_INFEASIBLE
    if not sol.is_optimal():
        raise SolverError(f"Solver stopped with status {sol.status.value}", detail=sol.message)

    if args.purify_transfer:
        sol = _purify_and_transfer(net, sol)

    with output_stream(args.output) as out:
        _write_solution(sol, args.format, out)
    return 0
