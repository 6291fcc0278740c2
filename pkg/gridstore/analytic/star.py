"""
Minimum storage budget for star networks.

A star has one generator at the center, every load attached to it by its
own line, and no other lines. When every branch cap covers the branch's
maximal prefix average, the minimum budget is the sum of the SGSL budgets
of the branches.
"""

import logging
from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np

from ..errors import AnalyticError, ErrorCode, HypothesisNotMet
from ..model.topology import resolve_topology
from ..model.types import DemandSeries, Network, TopologyKind, cap_value, is_unbounded
from ..model.validation import validate
from ..program.spec import ProblemSpec
from .report import AnalyticReport, BranchReport
from .segmentation import tau_sequence, unconstrained_dispatch
from .sgsl import (
    f_min_sgsl,
    h_min_sgsl,
    h_sat,
    max_prefix_average,
    require_ideal_storage,
    require_strict_cost,
)

logger = logging.getLogger(__name__)


def _branch_h_min(bus: int, d: Sequence[float], cap: float) -> float:
    peak = max_prefix_average(d)
    if cap < peak:
        raise HypothesisNotMet(
            f"Branch {bus}: line cap {cap:.12g} is below the maximal prefix average {peak:.12g}",
            detail="every branch cap must cover its maximal prefix average",
            suggestions=[f"Raise the cap of the line to bus {bus} to at least {peak:.12g}"],
        )
    return float(h_min_sgsl(d, cap))


def h_min_star(
    branch_demands: Mapping[int, Sequence[float]],
    branch_caps: Mapping[int, float],
) -> float:
    """
    Minimum storage budget of a star network.

    Args:
        branch_demands: Load bus id to its demand series
        branch_caps: Load bus id to the cap of its line to the center

    Returns:
        Sum over branches of the SGSL minimum budget

    Raises:
        HypothesisNotMet: a branch cap is below that branch's maximal
            prefix average
    """
    if set(branch_demands) != set(branch_caps):
        raise AnalyticError(
            "Branch demands and caps must cover the same buses",
            detail=f"demands={sorted(branch_demands)}, caps={sorted(branch_caps)}",
        )
    return float(sum(
        _branch_h_min(bus, branch_demands[bus], float(branch_caps[bus]))
        for bus in sorted(branch_demands)
    ))


def analyze_star(
    net: Network,
    demand: DemandSeries,
    spec: Optional[ProblemSpec] = None,
    budget=None,
) -> AnalyticReport:
    """
    Closed-form figures for a star model.

    Per-branch figures come from the SGSL closed forms; f_min, h_sat, tau
    and the unconstrained dispatch refer to the aggregate demand seen by
    the center generator.

    Raises:
        AnalyticError: not a star, bounded generator, or storage and cost
            assumptions fail
        HypothesisNotMet: a branch cap is below its maximal prefix average
    """
    spec = spec or ProblemSpec()
    if budget is not None:
        spec = spec.with_budget(budget)
    validate(net, demand).raise_if_invalid()
    topology = resolve_topology(net)
    if topology not in (TopologyKind.STAR, TopologyKind.SGSL):
        raise AnalyticError(
            f"Expected a star network, got {topology.value}",
            error_code=ErrorCode.TOPOLOGY_UNSUPPORTED,
        )
    require_ideal_storage(net)
    center = net.generator_ids[0]
    cost = require_strict_cost(net.bus(center).cost, center)
    if not is_unbounded(spec.gen_cap_for(net, center)):
        raise AnalyticError(
            f"Star analysis needs an unbounded generator cap at bus {center}",
            suggestions=["Set gen_cap to \"inf\" or use the solve verb"],
        )

    demands: Dict[int, np.ndarray] = {}
    caps: Dict[int, float] = {}
    for load in net.load_ids:
        demands[load] = demand.column(load)
        caps[load] = cap_value(spec.line_cap_for(net.line_between(center, load)))

    branches: List[BranchReport] = []
    for load in sorted(demands):
        branches.append(BranchReport(
            bus=load,
            line_cap=caps[load],
            prefix_peak=max_prefix_average(demands[load]),
            h_min=_branch_h_min(load, demands[load], caps[load]),
        ))
    total_h_min = float(sum(branch.h_min for branch in branches))

    aggregate = demand.total()
    dispatch = unconstrained_dispatch(aggregate, cost)
    budget_value = cap_value(spec.budget)
    report = AnalyticReport(
        topology=TopologyKind.STAR.value,
        budget=budget_value,
        cap=cap_value(spec.gen_cap_for(net, center)),
        f_min=f_min_sgsl(aggregate, spec.budget),
        h_min=total_h_min,
        h_sat=h_sat(aggregate),
        tau=tau_sequence(aggregate),
        g_unconstrained=dispatch,
        feasible=budget_value >= total_h_min,
        unconstrained_cost=float(np.sum(cost.value(dispatch))),
        branches=branches,
    )
    logger.debug(f"[Analytic] star center={center} h_min={total_h_min:.12g} branches={len(branches)}")
    return report
