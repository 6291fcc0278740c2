"""
Constructive steps on an optimum: purification of a single-connection
generator bus and transfer of its storage to the neighboring bus.

purify rewrites the generation, charging and discharging profiles of bus
i without changing its storage levels or the flow on its line, so the
point stays feasible and its cost does not increase. transfer_storage then
moves the whole storage of bus i to its neighbor j, producing a point of
the program with b_i pinned to zero and the same generation profiles.
"""

import logging
from typing import Optional, Tuple

import numpy as np

from ..errors import AnalyticError, ErrorCode, PurificationError, TransferError
from ..model.topology import unique_neighbor
from ..model.types import BusKind, CostPoly, DemandSeries, Line, Network, cap_value
from ..program.builder import build
from ..program.program import ConvexProgram
from ..program.spec import ProblemSpec
from ..solver.base import Solution, SolverStatus

logger = logging.getLogger(__name__)

PROFILE_TOL = 1e-9
DISCHARGE_TOL = 1e-13
MAX_PASSES = 50


def exchange_gain(cost: CostPoly, x1: float, x2: float, eta: float) -> float:
    """
    phi(x1) + phi(x2) - phi(x1 + eta) - phi(x2 - eta).

    Nonnegative for convex phi whenever 0 <= eta <= x2 - x1.

    Raises:
        AnalyticError: eta outside [0, x2 - x1]
    """
    if eta < 0 or eta > (x2 - x1) + PROFILE_TOL:
        raise AnalyticError(
            "Exchange step needs 0 <= eta <= x2 - x1",
            detail=f"x1={x1}, x2={x2}, eta={eta}",
        )
    return float(cost.value(x1) + cost.value(x2) - cost.value(x1 + eta) - cost.value(x2 - eta))


def _single_connection(net: Network, bus_id: int, error_cls) -> Tuple[int, Line]:
    if not net.has_bus(bus_id) or net.bus(bus_id).kind != BusKind.GENERATOR:
        raise error_cls(
            f"Bus {bus_id} is not a generator bus",
            error_code=ErrorCode.NOT_A_GENERATOR,
        )
    neighbor = unique_neighbor(net, bus_id)
    if neighbor is None:
        raise error_cls(
            f"Bus {bus_id} has {len(net.neighbors(bus_id))} neighbors, expected exactly one",
            error_code=ErrorCode.NOT_SINGLE_CONNECTION,
        )
    return neighbor, net.line_between(bus_id, neighbor)


def _require_split_storage(program: ConvexProgram, error_cls) -> None:
    if not program.variables.has_block("gamma"):
        raise error_cls(
            "Construction needs separate charging and discharging variables",
            error_code=ErrorCode.ASSUMPTION_VIOLATED,
            suggestions=["Solve without --net-storage"],
        )


def _flow_tolerance(sol: Solution, line: Line, cap: float) -> float:
    """Base tolerance widened by whatever the solver already exceeds the cap by."""
    if np.isinf(cap):
        return PROFILE_TOL
    flow = sol.profile("p", (line.from_bus, line.to_bus))
    return PROFILE_TOL + max(0.0, float(np.max(np.abs(flow))) - cap)


class _BusProfiles:
    """Mutable copy of g, gamma and delta at one bus."""

    def __init__(self, sol: Solution, bus_id: int):
        self.g = sol.profile("g", bus_id).copy()
        self.gamma = sol.profile("gamma", bus_id).copy()
        self.delta = sol.profile("delta", bus_id).copy()
        tech = sol.program.network.storage
        self.a_g = tech.eff_charge
        self.a_d = tech.eff_discharge
        self.alpha = tech.roundtrip

    def inflow(self, t: int) -> float:
        return self.a_g * self.gamma[t] - self.delta[t] / self.a_d

    def activity(self) -> float:
        return float(np.sum(self.gamma) + np.sum(self.delta))

    def separate(self, t: int) -> bool:
        """Remove simultaneous charging and discharging at t; True when anything changed."""
        g, gamma, delta = self.g[t], self.gamma[t], self.delta[t]
        if self.alpha == 1.0:
            both = min(gamma, delta)
            if both <= 0.0:
                return False
            self.gamma[t] -= both
            self.delta[t] -= both
            if gamma <= delta:
                self.gamma[t] = 0.0
            else:
                self.delta[t] = 0.0
            return True

        if min(g, gamma, delta) <= 0.0:
            return False
        loss = 1.0 - self.alpha
        candidates = (loss * gamma, (loss / self.alpha) * delta, g)
        which = int(np.argmin(candidates))
        step = candidates[which]
        self.g[t] = g - step
        self.gamma[t] = max(gamma - step / loss, 0.0)
        self.delta[t] = max(delta - self.alpha * step / loss, 0.0)
        (self.gamma, self.delta, self.g)[which][t] = 0.0
        return True

    def write(self, sol: Solution, bus_id: int) -> np.ndarray:
        variables = sol.program.variables
        x = sol.x.copy()
        for name, values in (("g", self.g), ("gamma", self.gamma), ("delta", self.delta)):
            for t in range(len(values)):
                x[variables.index(name, bus_id, t + 1)] = values[t]
        return x


def purify(
    net: Network,
    demand: DemandSeries,
    spec: ProblemSpec,
    sol: Solution,
    i: int,
) -> Solution:
    """
    Rewrite an optimum so bus i never generates while both charging and
    discharging, and never generates above its line cap.

    Args:
        net: Network of the solved program
        demand: Demand of the solved program
        spec: Spec of the solved program
        sol: Optimal solution
        i: Single-connection generator bus

    Returns:
        Optimal solution with g_i gamma_i delta_i = 0 and g_i <= f_ij at every t

    Raises:
        PurificationError: input not optimal, bus not single-connection,
            or no progress toward the line cap
    """
    if not sol.is_optimal():
        raise PurificationError(
            f"Purification needs an optimal solution, got {sol.status.value}",
            error_code=ErrorCode.NOT_OPTIMAL,
        )
    _require_split_storage(sol.program, PurificationError)
    j, line = _single_connection(net, i, PurificationError)
    cap = cap_value(spec.line_cap_for(line))
    cost = net.bus(i).cost
    limit = cap + _flow_tolerance(sol, line, cap)

    bus = _BusProfiles(sol, i)
    T = len(bus.g)
    changed = False
    for t in range(T):
        changed |= bus.separate(t)

    steps = 0
    for _ in range(MAX_PASSES):
        if float(np.max(bus.g)) <= limit:
            break
        before = bus.activity()
        for _ in range(T * T):
            t0 = int(np.argmax(bus.g))
            if bus.g[t0] <= limit:
                break
            _shift_generation(bus, cost, t0, i)
            steps += 1
            changed = True
            bus.separate(t0)
        if float(np.max(bus.g)) > limit and before - bus.activity() < 1e-12:
            raise PurificationError(
                f"Purification of bus {i} made no progress",
                detail=f"max g={float(np.max(bus.g)):.12g}, cap={cap:.12g}",
            )
    else:
        if float(np.max(bus.g)) > limit:
            raise PurificationError(
                f"Purification of bus {i} did not reach the line cap",
                detail=f"max g={float(np.max(bus.g)):.12g}, cap={cap:.12g}",
            )

    if not changed:
        return sol
    purified = sol.with_point(bus.write(sol, i), message=f"purified at bus {i}")
    logger.debug(
        f"[Purify] bus {i} -> {j}: {steps} shift steps, "
        f"objective {sol.objective:.12g} -> {purified.objective:.12g}"
    )
    return purified


def _shift_generation(bus: _BusProfiles, cost: CostPoly, t0: int, i: int) -> None:
    """Generate less at t0 and more at the first later discharge t1."""
    T = len(bus.g)
    if bus.gamma[t0] <= 0.0:
        raise PurificationError(
            f"Bus {i} exceeds its line cap at t={t0 + 1} without charging",
            detail="the line-flow constraint is violated at the input point",
        )
    t1 = next((t for t in range(t0 + 1, T) if bus.inflow(t) < -DISCHARGE_TOL), None)
    if t1 is None:
        raise PurificationError(
            f"Bus {i} charges at t={t0 + 1} but never discharges afterwards",
            detail=f"gamma={bus.gamma[t0]:.3e}",
        )
    alpha = bus.alpha
    candidates = (bus.gamma[t0], bus.delta[t1] / alpha, bus.g[t0])
    step = min(candidates)
    if step <= 0.0:
        raise PurificationError(f"Zero-length shift at bus {i}, t0={t0 + 1}, t1={t1 + 1}")
    if bus.g[t0] <= bus.g[t1] + alpha * step:
        raise PurificationError(
            f"Generation at t={t0 + 1} already balanced against t={t1 + 1}",
            detail="the line-flow constraint is violated at the input point",
        )

    gain = exchange_gain(cost, bus.g[t1], bus.g[t0], alpha * step)
    if gain < -PROFILE_TOL * (1.0 + abs(cost.value(bus.g[t0]))):
        raise PurificationError(f"Shift at bus {i} would raise cost by {-gain:.3e}")

    bus.g[t0] -= step
    bus.g[t1] += alpha * step
    bus.gamma[t0] -= step
    bus.delta[t1] -= alpha * step
    if step == candidates[0]:
        bus.gamma[t0] = 0.0
    elif step == candidates[1]:
        bus.delta[t1] = 0.0
    else:
        bus.g[t0] = 0.0


def transfer_storage(net: Network, sol: Solution, i: int, program: Optional[ConvexProgram] = None) -> Solution:
    """
    Move the storage of a single-connection generator bus to its neighbor.

    Args:
        net: Network of the solved program
        sol: Solution whose generation at bus i fits the line cap
        i: Single-connection generator bus
        program: Target program (built with i added to the pinned set when omitted)

    Returns:
        Solution of the program with b_i pinned to zero, same generation
        profiles and objective; multipliers are not carried over

    Raises:
        TransferError: generation at i exceeds the line cap, or the
            neighbor is itself pinned while storage would move there
    """
    source = sol.program
    _require_split_storage(source, TransferError)
    j, line = _single_connection(net, i, TransferError)
    spec = source.spec
    cap = cap_value(spec.line_cap_for(line))
    g_i = sol.profile("g", i)
    limit = cap + _flow_tolerance(sol, line, cap)
    if float(np.max(g_i)) > limit:
        raise TransferError(
            f"Generation at bus {i} exceeds the cap of line {line.label}",
            detail=f"max g={float(np.max(g_i)):.12g}, cap={cap:.12g}",
            suggestions=["Run purify on the bus first"],
        )

    gamma_i = sol.profile("gamma", i)
    delta_i = sol.profile("delta", i)
    b_i = sol.capacities()[i]
    if j in spec.pinned_zero and (b_i > PROFILE_TOL or np.any(gamma_i + delta_i > PROFILE_TOL)):
        raise TransferError(f"Neighbor {j} of bus {i} is pinned to zero storage")

    target = program or build(net, source.demand, spec.with_pinned(spec.pinned_zero | {i}))
    if target.variables != source.variables:
        raise TransferError("Target program has a different variable layout")

    variables = source.variables
    x = sol.x.copy()
    net_charge = gamma_i - delta_i
    T = source.period
    slack = net.slack_id
    for t in range(1, T + 1):
        x[variables.index("gamma", j, t)] += gamma_i[t - 1]
        x[variables.index("delta", j, t)] += delta_i[t - 1]
        x[variables.index("gamma", i, t)] = 0.0
        x[variables.index("delta", i, t)] = 0.0

        p = variables.index("p", (line.from_bus, line.to_bus), t)
        x[p] += net_charge[t - 1] if line.from_bus == i else -net_charge[t - 1]

        shift = net_charge[t - 1] / line.admittance
        if i == slack:
            for k in net.bus_ids:
                if k != i:
                    x[variables.index("theta", k, t)] -= shift
        else:
            x[variables.index("theta", i, t)] += shift

    x[variables.index("b", j)] += b_i
    x[variables.index("b", i)] = 0.0

    moved = Solution(
        status=SolverStatus.OPTIMAL,
        x=x,
        y=None,
        z=None,
        objective=target.eval_objective(x),
        dual_objective=sol.dual_objective,
        gap=sol.gap,
        iterations=sol.iterations,
        program=target,
        message=f"storage of bus {i} moved to bus {j}",
    )
    logger.debug(
        f"[Transfer] bus {i} -> {j}: b={b_i:.6g}, objective {sol.objective:.12g} -> {moved.objective:.12g}"
    )
    return moved
