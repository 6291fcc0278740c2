"""
Program builder: (Network, DemandSeries, ProblemSpec) -> ConvexProgram.

Column blocks, in order: g (generators), gamma, delta (or r in the
net-storage form), theta (all buses), p (lines, oriented from -> to), b.
Storage level s_k(t) is never a column; it is expanded as the running sum
of alpha_gamma * gamma - delta / alpha_delta.

Row tags:
    gen_cap    0 <= g_k(t) <= gen cap
    flow       p_kl(t) = y_kl (theta_k(t) - theta_l(t))
    flow_cap   |p_kl(t)| <= f_kl
    level      0 <= s_k(t) <= b_k
    capacity   b_k >= 0, sum b_k <= h
    ramp       0 <= gamma_k(t) <= eps_gamma b_k, 0 <= delta_k(t) <= eps_delta b_k
    balance    power balance
    periodic   sum_t (alpha_gamma gamma - delta / alpha_delta) = 0
    slack      theta_slack(t) = 0
    pin        b_i = 0 for pinned buses
    implied    sum b_k <= B when the budget is unbounded
"""

import logging
from typing import Iterable, List, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from ..errors import ErrorCode, ProgramBuildError
from ..model.types import BusKind, DemandSeries, Network, cap_value, is_unbounded
from ..model.validation import validate
from .program import ConvexProgram, RowInfo, VariableIndex
from .spec import ProblemSpec

logger = logging.getLogger(__name__)


class _RowCollector:
    """Accumulates sparse rows with their tags, labels and right-hand sides."""

    def __init__(self):
        self.rows: List[int] = []
        self.cols: List[int] = []
        self.vals: List[float] = []
        self.rhs: List[float] = []
        self.info: List[RowInfo] = []

    def add(self, tag: str, label: str, coeffs: Iterable[Tuple[int, float]], rhs: float) -> None:
        row = len(self.rhs)
        for col, val in coeffs:
            if val != 0.0:
                self.rows.append(row)
                self.cols.append(col)
                self.vals.append(float(val))
        self.rhs.append(float(rhs))
        self.info.append(RowInfo(tag, label))

    def matrix(self, n_cols: int) -> sp.csr_matrix:
        return sp.csr_matrix(
            (self.vals, (self.rows, self.cols)), shape=(len(self.rhs), n_cols)
        )


def _check_spec(net: Network, spec: ProblemSpec) -> None:
    for bus_id in sorted(spec.pinned_zero):
        if not net.has_bus(bus_id):
            raise ProgramBuildError(f"Pinned bus {bus_id} does not exist", error_code=ErrorCode.UNKNOWN_BUS)
        if net.bus(bus_id).kind != BusKind.GENERATOR:
            raise ProgramBuildError(
                f"Pinned bus {bus_id} is not a generator bus",
                error_code=ErrorCode.NOT_A_GENERATOR,
            )
    for bus_id in sorted(spec.gen_caps):
        if not net.has_bus(bus_id):
            raise ProgramBuildError(f"Generator override for unknown bus {bus_id}", error_code=ErrorCode.UNKNOWN_BUS)
        if net.bus(bus_id).kind != BusKind.GENERATOR:
            raise ProgramBuildError(
                f"Generator override for non-generator bus {bus_id}",
                error_code=ErrorCode.NOT_A_GENERATOR,
            )
    for k, l in sorted(spec.line_caps):
        if net.line_between(k, l) is None:
            raise ProgramBuildError(f"Line override for unknown line {k}-{l}", error_code=ErrorCode.UNKNOWN_BUS)
    if spec.net_storage and (net.storage.eff_charge != 1.0 or net.storage.eff_discharge != 1.0):
        raise ProgramBuildError(
            "Net-storage formulation requires lossless storage",
            error_code=ErrorCode.ASSUMPTION_VIOLATED,
            suggestions=["Set eff_charge = eff_discharge = 1 or drop --net-storage"],
        )


def implied_budget(demand: DemandSeries, net: Network) -> float:
    """
    Finite stand-in for an unbounded budget that never binds an optimum.

    Storage moves at most sum |d| of energy, losing a factor of the
    roundtrip efficiency, and a ramp fraction below one needs capacity
    1/epsilon times the rate it supports.
    """
    tech = net.storage
    total = float(sum(np.abs(np.asarray(column, dtype=float)).sum() for column in demand.values.values()))
    ramp = min(tech.ramp_charge, tech.ramp_discharge, 1.0)
    return total / (tech.roundtrip * ramp) + 1.0


def build(
    net: Network,
    demand: DemandSeries,
    spec: Optional[ProblemSpec] = None,
    drop_tags: Iterable[str] = (),
) -> ConvexProgram:
    """
    Build the storage placement program.

    Args:
        net: Validated network
        demand: Demand series over one period
        spec: Budget, pinned-zero set and overrides
        drop_tags: Row tags to leave out (columns are unaffected)

    Returns:
        ConvexProgram encoding P (no pins) or its pinned restriction

    Raises:
        ModelValidationError: model fails validation
        ProgramBuildError: spec references unknown or non-generator buses
    """
    spec = spec or ProblemSpec()
    validate(net, demand).raise_if_invalid()
    _check_spec(net, spec)
    drop = set(drop_tags)

    T = demand.period
    buses = net.bus_ids
    generators = net.generator_ids
    lines = list(net.lines)
    tech = net.storage
    a_g, a_d = tech.eff_charge, tech.eff_discharge

    variables = VariableIndex()
    variables.add_block("g", generators, T)
    if spec.net_storage:
        variables.add_block("r", buses, T)
    else:
        variables.add_block("gamma", buses, T)
        variables.add_block("delta", buses, T)
    variables.add_block("theta", buses, T)
    variables.add_block("p", [(line.from_bus, line.to_bus) for line in lines], T)
    variables.add_block("b", buses, None)
    n = variables.size

    def col(name, key, t=None):
        return variables.index(name, key, t)

    def charge_terms(k: int, t: int, scale: float = 1.0) -> List[Tuple[int, float]]:
        """Coefficients of the storage inflow at bus k, time t."""
        if spec.net_storage:
            return [(col("r", k, t), scale)]
        return [(col("gamma", k, t), scale * a_g), (col("delta", k, t), -scale / a_d)]

    # Objective
    q_diag = np.zeros(n)
    c = np.zeros(n)
    const = 0.0
    for k in generators:
        cost = net.bus(k).cost
        for t in range(1, T + 1):
            q_diag[col("g", k, t)] = 2.0 * cost.c2
            c[col("g", k, t)] = cost.c1
        const += T * cost.c0

    eq = _RowCollector()
    ineq = _RowCollector()

    def add_eq(tag, label, coeffs, rhs):
        if tag not in drop:
            eq.add(tag, label, coeffs, rhs)

    def add_in(tag, label, coeffs, rhs):
        if tag not in drop:
            ineq.add(tag, label, coeffs, rhs)

    # generation limits
    for k in generators:
        cap = spec.gen_cap_for(net, k)
        for t in range(1, T + 1):
            add_in("gen_cap", f"gen_cap:lower:bus={k}:t={t}", [(col("g", k, t), -1.0)], 0.0)
            if not is_unbounded(cap):
                add_in("gen_cap", f"gen_cap:upper:bus={k}:t={t}", [(col("g", k, t), 1.0)], cap_value(cap))

    # line flow and flow limits
    for line in lines:
        key = (line.from_bus, line.to_bus)
        cap = spec.line_cap_for(line)
        y = line.admittance
        for t in range(1, T + 1):
            add_eq("flow", f"flow:line={line.label}:t={t}", [
                (col("p", key, t), 1.0),
                (col("theta", line.from_bus, t), -y),
                (col("theta", line.to_bus, t), y),
            ], 0.0)
            if not is_unbounded(cap):
                add_in("flow_cap", f"flow_cap:upper:line={line.label}:t={t}", [(col("p", key, t), 1.0)], cap_value(cap))
                add_in("flow_cap", f"flow_cap:lower:line={line.label}:t={t}", [(col("p", key, t), -1.0)], cap_value(cap))

    # storage level bounds, s expanded as a running sum
    for k in buses:
        for t in range(1, T + 1):
            running = [term for tau in range(1, t + 1) for term in charge_terms(k, tau)]
            add_in("level", f"level:lower:bus={k}:t={t}", [(j, -v) for j, v in running], 0.0)
            add_in("level", f"level:upper:bus={k}:t={t}", running + [(col("b", k), -1.0)], 0.0)

    # capacity sign and budget
    for k in buses:
        add_in("capacity", f"capacity:nonneg:bus={k}", [(col("b", k), -1.0)], 0.0)
    all_b = [(col("b", k), 1.0) for k in buses]
    if is_unbounded(spec.budget):
        bound = implied_budget(demand, net)
        add_in("implied", "implied:budget", all_b, bound)
    else:
        add_in("capacity", "capacity:budget", all_b, cap_value(spec.budget))

    # ramp limits
    for k in buses:
        for t in range(1, T + 1):
            if spec.net_storage:
                r = col("r", k, t)
                add_in("ramp", f"ramp:charge:bus={k}:t={t}", [(r, 1.0), (col("b", k), -tech.ramp_charge)], 0.0)
                add_in("ramp", f"ramp:discharge:bus={k}:t={t}", [(r, -1.0), (col("b", k), -tech.ramp_discharge)], 0.0)
            else:
                gamma, delta = col("gamma", k, t), col("delta", k, t)
                add_in("ramp", f"ramp:charge_nonneg:bus={k}:t={t}", [(gamma, -1.0)], 0.0)
                add_in("ramp", f"ramp:charge:bus={k}:t={t}", [(gamma, 1.0), (col("b", k), -tech.ramp_charge)], 0.0)
                add_in("ramp", f"ramp:discharge_nonneg:bus={k}:t={t}", [(delta, -1.0)], 0.0)
                add_in("ramp", f"ramp:discharge:bus={k}:t={t}", [(delta, 1.0), (col("b", k), -tech.ramp_discharge)], 0.0)

    # power balance: g - d - (gamma - delta) = sum of outgoing flows
    for k in buses:
        bus = net.bus(k)
        d = demand.column(k) if bus.kind == BusKind.LOAD else np.zeros(T)
        for t in range(1, T + 1):
            coeffs: List[Tuple[int, float]] = []
            if bus.kind == BusKind.GENERATOR:
                coeffs.append((col("g", k, t), 1.0))
            if spec.net_storage:
                coeffs.append((col("r", k, t), -1.0))
            else:
                coeffs.append((col("gamma", k, t), -1.0))
                coeffs.append((col("delta", k, t), 1.0))
            for line in net.incident_lines(k):
                sign = -1.0 if line.from_bus == k else 1.0
                coeffs.append((col("p", (line.from_bus, line.to_bus), t), sign))
            add_eq("balance", f"balance:bus={k}:t={t}", coeffs, d[t - 1])

    # periodicity
    for k in buses:
        terms = [term for t in range(1, T + 1) for term in charge_terms(k, t)]
        add_eq("periodic", f"periodic:bus={k}", terms, 0.0)

    # angle reference
    slack = net.slack_id
    for t in range(1, T + 1):
        add_eq("slack", f"slack:bus={slack}:t={t}", [(col("theta", slack, t), 1.0)], 0.0)

    # restricted problem
    for k in sorted(spec.pinned_zero):
        add_eq("pin", f"pin:bus={k}", [(col("b", k), 1.0)], 0.0)

    program = ConvexProgram(
        variables=variables,
        q_diag=q_diag,
        c=c,
        const=const,
        a_eq=eq.matrix(n),
        b_eq=np.asarray(eq.rhs),
        eq_rows=tuple(eq.info),
        a_in=ineq.matrix(n),
        b_in=np.asarray(ineq.rhs),
        in_rows=tuple(ineq.info),
        period=T,
        network=net,
        demand=demand,
        spec=spec,
    )
    logger.debug(
        f"[Builder] {n} variables, {program.n_eq} equalities, {program.n_in} inequalities "
        f"(pinned={sorted(spec.pinned_zero)}, budget={spec.budget})"
    )
    return program
