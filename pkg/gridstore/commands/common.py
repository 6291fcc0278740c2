"""
Argument types, output helpers and infeasibility hints shared by the verbs.
"""

import argparse
import logging
import sys
from contextlib import contextmanager
from typing import Iterable, Iterator, List, Optional, Sequence, TextIO, Tuple

import pandas as pd

from ..analytic.report import Infeasible
from ..analytic.sgsl import analyze_sgsl
from ..analytic.star import analyze_star
from ..errors import GridstoreError, HypothesisNotMet, UsageError
from ..model.topology import detect_topology
from ..model.types import DemandSeries, Network, TopologyKind, parse_cap
from ..program.spec import ProblemSpec
from ..sweep.plan import parse_line_target, parse_variant

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.12g"


def budget_arg(text: str):
    """argparse type for --budget: nonnegative real or "inf"."""
    try:
        return parse_cap(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"invalid budget {text!r}: expected a nonnegative real or 'inf'") from e


def cap_arg(text: str) -> float:
    try:
        value = parse_cap(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"invalid cap {text!r}") from e
    return float("inf") if not isinstance(value, float) else value


def pinned_arg(text: str):
    try:
        return parse_variant(text)
    except UsageError as e:
        raise argparse.ArgumentTypeError(e.message) from e


def apply_overrides(spec: ProblemSpec, overrides: Sequence[str]) -> ProblemSpec:
    """
    Apply ``f_K-L=V`` (line cap) and ``g_K=V`` (generator cap) overrides.

    Raises:
        UsageError: malformed override
    """
    for item in overrides or ():
        name, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"Invalid override '{item}'", detail="expected f_K-L=V or g_K=V")
        try:
            cap = parse_cap(value)
        except ValueError as e:
            raise UsageError(f"Invalid override value in '{item}'", detail=str(e)) from e
        if name.startswith("f_"):
            k, l = parse_line_target(name[2:])
            spec = spec.with_line_cap(k, l, cap)
        elif name.startswith("g_"):
            try:
                bus_id = int(name[2:])
            except ValueError as e:
                raise UsageError(f"Invalid override '{item}'", detail="expected g_K=V") from e
            spec = spec.with_gen_cap(bus_id, cap)
        else:
            raise UsageError(f"Invalid override '{item}'", detail="expected f_K-L=V or g_K=V")
    return spec


def add_output_arguments(parser: argparse.ArgumentParser, default_format: str = "text") -> None:
    parser.add_argument(
        "--format",
        choices=["text", "csv"],
        default=default_format,
        help=f"Output format (default: {default_format})",
    )
    parser.add_argument("--output", default=None, help="Write output to this file instead of stdout")


@contextmanager
def output_stream(path: Optional[str]) -> Iterator[TextIO]:
    if path is None:
        yield sys.stdout
        return
    with open(path, "w", encoding="utf-8", newline="") as handle:
        yield handle


def format_value(value) -> str:
    if isinstance(value, float):
        return FLOAT_FORMAT % value
    return str(value)


def write_rows(rows: Iterable[Tuple[str, object]], fmt: str, out: TextIO) -> None:
    """Write (quantity, value) pairs as ``quantity: value`` lines or a two-column CSV."""
    rows = list(rows)
    if fmt == "csv":
        frame = pd.DataFrame(rows, columns=["quantity", "value"])
        frame["value"] = frame["value"].map(format_value)
        frame.to_csv(out, index=False, lineterminator="\n")
        return
    for name, value in rows:
        out.write(f"{name}: {format_value(value)}\n")


def infeasibility_hints(net: Network, demand: DemandSeries, spec: ProblemSpec) -> List[str]:
    """Closed-form thresholds explaining an infeasible SGSL or star model."""
    topology = detect_topology(net)
    try:
        if topology == TopologyKind.SGSL:
            report = analyze_sgsl(net, demand, spec)
            hints = [f"f_min at this budget is {format_value(report.f_min)} (effective cap {format_value(report.cap)})"]
            if isinstance(report.h_min, Infeasible):
                hints.append("no budget helps: the effective cap is below the maximal prefix average demand")
            else:
                hints.append(f"h_min at this cap is {format_value(report.h_min)}")
            return hints
        if topology == TopologyKind.STAR:
            report = analyze_star(net, demand, spec)
            hints = [f"branch {b.bus}: prefix peak {format_value(b.prefix_peak)}, h_min {format_value(b.h_min)}"
                     for b in report.branches]
            hints.append(f"h_min of the star is {format_value(report.h_min)}")
            return hints
    except HypothesisNotMet as e:
        return [e.message] + list(e.suggestions)
    except GridstoreError as e:
        logger.debug(f"[CLI] no closed-form hint: {e.message}")
    return []
