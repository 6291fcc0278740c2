"""
Closed forms for the single-generator single-load (SGSL) network.

All window maxima are evaluated exactly over fractions and converted to
float on return.
"""

import logging
import math
from fractions import Fraction
from typing import List, Optional, Sequence

import numpy as np

from ..errors import AnalyticError, ErrorCode
from ..model.topology import resolve_topology
from ..model.validation import validate
from ..model.types import (
    UNBOUNDED,
    CostPoly,
    DemandSeries,
    Network,
    TopologyKind,
    cap_value,
    is_unbounded,
)
from ..program.spec import ProblemSpec
from .report import INFEASIBLE, AnalyticReport, BudgetThreshold
from .segmentation import exact_series, prefix_sums, tau_sequence, unconstrained_dispatch

logger = logging.getLogger(__name__)


def max_prefix_average(d: Sequence[float]) -> float:
    """max_t (sum_{tau <= t} d(tau)) / t."""
    return float(_max_prefix_average(prefix_sums(exact_series(d))))


def _max_prefix_average(sums: List[Fraction]) -> Fraction:
    return max(sums[t] / t for t in range(1, len(sums)))


def f_min_sgsl(d: Sequence[float], h=UNBOUNDED) -> float:
    """
    Smallest effective cap min(gen cap, line cap) that keeps SGSL feasible.

    Args:
        d: Nonnegative load-bus demand over one period
        h: Storage budget, or UNBOUNDED

    Returns:
        max of the maximal prefix average and, for a finite budget, the
        largest window average of demand in excess of h
    """
    sums = prefix_sums(exact_series(d))
    best = _max_prefix_average(sums)
    if is_unbounded(h):
        return float(best)
    budget = Fraction(float(h))
    T = len(sums) - 1
    for t1 in range(1, T):
        for t2 in range(t1 + 1, T + 1):
            value = (sums[t2] - sums[t1] - budget) / (t2 - t1)
            if value > best:
                best = value
    return float(best)


def h_min_sgsl(d: Sequence[float], cap) -> BudgetThreshold:
    """
    Smallest budget that makes SGSL feasible at an effective cap.

    Returns:
        max over windows of the positive part of sum(d - cap), or
        INFEASIBLE when cap is below the maximal prefix average
    """
    values = exact_series(d)
    sums = prefix_sums(values)
    if is_unbounded(cap) or math.isinf(float(cap)):
        return 0.0
    limit = Fraction(float(cap))
    if limit < _max_prefix_average(sums):
        return INFEASIBLE

    # maximum subarray of d - cap, clamped at zero
    best = Fraction(0)
    running = Fraction(0)
    for v in values:
        running = max(Fraction(0), running + v - limit)
        best = max(best, running)
    return float(best)


def h_sat(d: Sequence[float]) -> float:
    """
    Budget beyond which the SGSL optimal cost no longer decreases.

    The unconstrained dispatch charges storage at the segment averages;
    h_sat is the largest storage level it reaches.
    """
    values = exact_series(d)
    sums = prefix_sums(values)
    tau = tau_sequence(d)
    best = Fraction(0)
    for m in range(len(tau.exact_averages)):
        start, end = tau.breakpoints[m], tau.breakpoints[m + 1]
        segment = sums[end] - sums[start]
        for t in range(start + 1, end + 1):
            level = segment * (t - start) / (end - start) - (sums[t] - sums[start])
            best = max(best, level)
    return float(best)


def require_ideal_storage(net: Network) -> None:
    tech = net.storage
    if tech.roundtrip != 1.0 or tech.ramp_charge != 1.0 or tech.ramp_discharge != 1.0:
        raise AnalyticError(
            "Closed forms assume lossless storage with unit ramp fractions",
            detail=(
                f"eff_charge={tech.eff_charge}, eff_discharge={tech.eff_discharge}, "
                f"ramp_charge={tech.ramp_charge}, ramp_discharge={tech.ramp_discharge}"
            ),
            suggestions=["Use the solve verb for lossy or ramp-limited storage"],
        )


def require_strict_cost(cost: Optional[CostPoly], bus_id: int) -> CostPoly:
    if cost is None or not cost.strictly_convex:
        raise AnalyticError(
            f"Generator {bus_id} needs a strictly convex cost (c2 > 0)",
            detail=f"cost={cost}",
        )
    return cost


def analyze_sgsl(
    net: Network,
    demand: DemandSeries,
    spec: Optional[ProblemSpec] = None,
    budget=None,
) -> AnalyticReport:
    """
    Closed-form figures for an SGSL model.

    Args:
        net: Two-bus network
        demand: Demand series
        spec: Cap overrides and budget (budget argument wins when given)
        budget: Storage budget h, or UNBOUNDED

    Returns:
        AnalyticReport at cap = min(gen cap, line cap)

    Raises:
        AnalyticError: not an SGSL model, or storage or cost assumptions fail
    """
    spec = spec or ProblemSpec()
    if budget is not None:
        spec = spec.with_budget(budget)
    validate(net, demand).raise_if_invalid()
    topology = resolve_topology(net)
    if topology != TopologyKind.SGSL:
        raise AnalyticError(
            f"Expected an SGSL network, got {topology.value}",
            error_code=ErrorCode.TOPOLOGY_UNSUPPORTED,
        )
    require_ideal_storage(net)
    generator = net.generator_ids[0]
    load = net.load_ids[0]
    cost = require_strict_cost(net.bus(generator).cost, generator)
    line = net.lines[0]

    d = demand.column(load)
    cap = min(cap_value(spec.gen_cap_for(net, generator)), cap_value(spec.line_cap_for(line)))
    f_min = f_min_sgsl(d, spec.budget)
    h_min = h_min_sgsl(d, cap)
    dispatch = unconstrained_dispatch(d, cost)
    report = AnalyticReport(
        topology=TopologyKind.SGSL.value,
        budget=cap_value(spec.budget),
        cap=cap,
        f_min=f_min,
        h_min=h_min,
        h_sat=h_sat(d),
        tau=tau_sequence(d),
        g_unconstrained=dispatch,
        feasible=cap >= f_min,
        unconstrained_cost=float(np.sum(cost.value(dispatch))),
    )
    logger.debug(
        f"[Analytic] SGSL cap={cap} f_min={f_min:.12g} h_min={h_min} h_sat={report.h_sat:.12g}"
    )
    return report
