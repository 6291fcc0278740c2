"""
Report-style model validation.

validate() never raises for data problems; it lists every violated
invariant with the offending bus or line.
"""

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import networkx as nx

from ..errors import ModelValidationError
from .types import BusKind, DemandSeries, Network

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ValidationIssue:
    """One violated invariant."""
    code: str
    message: str
    bus: Optional[int] = None
    line: Optional[str] = None


@dataclass
class ValidationReport:
    """Collected validation issues; empty iff the model is well-formed."""
    issues: List[ValidationIssue] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.issues

    def __bool__(self) -> bool:
        return self.ok

    def messages(self) -> List[str]:
        return [issue.message for issue in self.issues]

    def contains(self, text: str) -> bool:
        return any(text in issue.message for issue in self.issues)

    def raise_if_invalid(self) -> None:
        if not self.ok:
            raise ModelValidationError(
                f"Model has {len(self.issues)} validation issue(s)",
                report=self,
                detail="; ".join(self.messages()),
            )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "ok": self.ok,
            "issues": [issue.__dict__ for issue in self.issues],
        }


def network_issues(net: Network) -> List[ValidationIssue]:
    """Structural issues of the network alone (no demand)."""
    issues: List[ValidationIssue] = []
    ids = [bus.id for bus in net.buses]
    known = set(ids)

    for bus_id, count in Counter(ids).items():
        if count > 1:
            issues.append(ValidationIssue("duplicate_bus", f"duplicate bus id {bus_id}", bus=bus_id))

    for bus in net.buses:
        if bus.kind == BusKind.GENERATOR:
            if bus.gen_cap is None:
                issues.append(ValidationIssue(
                    "bus_kind", f"bus kind violation: generator bus {bus.id} has no gen_cap", bus=bus.id))
            if bus.cost is None:
                issues.append(ValidationIssue(
                    "bus_kind", f"bus kind violation: generator bus {bus.id} has no cost", bus=bus.id))
            if bus.renewable:
                issues.append(ValidationIssue(
                    "bus_kind", f"bus kind violation: generator bus {bus.id} flagged renewable", bus=bus.id))
        else:
            if bus.gen_cap is not None:
                issues.append(ValidationIssue(
                    "bus_kind", f"bus kind violation: load bus {bus.id} has a gen_cap", bus=bus.id))
            if bus.cost is not None:
                issues.append(ValidationIssue(
                    "bus_kind", f"bus kind violation: load bus {bus.id} has a cost", bus=bus.id))

    if not net.generator_ids:
        issues.append(ValidationIssue("no_generators", "network has no generator bus"))
    if not net.load_ids:
        issues.append(ValidationIssue("no_loads", "network has no load bus"))

    seen = set()
    for line in net.lines:
        for end in (line.from_bus, line.to_bus):
            if end not in known:
                issues.append(ValidationIssue(
                    "unknown_bus", f"line {line.label} references unknown bus {end}", line=line.label))
        if line.from_bus == line.to_bus:
            issues.append(ValidationIssue(
                "self_loop", f"line {line.label} connects bus {line.from_bus} to itself", line=line.label))
        if line.key in seen:
            issues.append(ValidationIssue(
                "parallel_line", f"more than one line between buses {line.key[0]} and {line.key[1]}",
                line=line.label))
        seen.add(line.key)

    if known:
        graph = nx.Graph()
        graph.add_nodes_from(known)
        graph.add_edges_from(
            (line.from_bus, line.to_bus) for line in net.lines
            if line.from_bus in known and line.to_bus in known
        )
        if not nx.is_connected(graph):
            issues.append(ValidationIssue("disconnected", "graph not connected"))
    else:
        issues.append(ValidationIssue("empty", "network has no buses"))

    if net.slack_bus is not None and net.slack_bus not in known:
        issues.append(ValidationIssue(
            "slack", f"slack bus {net.slack_bus} does not exist", bus=net.slack_bus))

    tech = net.storage
    if tech.ramp_charge > 1.0 / tech.eff_charge:
        issues.append(ValidationIssue(
            "storage", f"ramp_charge {tech.ramp_charge} exceeds 1/eff_charge"))
    if tech.ramp_discharge > tech.eff_discharge:
        issues.append(ValidationIssue(
            "storage", f"ramp_discharge {tech.ramp_discharge} exceeds eff_discharge"))
    if tech.initial_level != 0.0:
        issues.append(ValidationIssue("storage", "initial storage level must be 0"))

    return issues


def demand_issues(net: Network, demand: DemandSeries) -> List[ValidationIssue]:
    issues: List[ValidationIssue] = []
    known = {bus.id for bus in net.buses}
    for bus_id, column in demand.values.items():
        if bus_id not in known:
            issues.append(ValidationIssue(
                "unknown_bus", f"demand given for unknown bus {bus_id}", bus=bus_id))
            continue
        bus = net.bus(bus_id)
        if bus.kind == BusKind.GENERATOR:
            issues.append(ValidationIssue(
                "bus_kind", f"bus kind violation: generator bus {bus_id} has a demand", bus=bus_id))
        if len(column) != demand.period:
            issues.append(ValidationIssue(
                "demand_length",
                f"demand of bus {bus_id} has {len(column)} entries, expected {demand.period}",
                bus=bus_id))
        if not all(math.isfinite(value) for value in column):
            issues.append(ValidationIssue(
                "non_finite_demand", f"non-finite demand at bus {bus_id}", bus=bus_id))
            continue
        if any(value < 0 for value in column) and not bus.renewable:
            issues.append(ValidationIssue(
                "negative_demand", f"negative demand at non-renewable bus {bus_id}", bus=bus_id))
    for bus_id in net.load_ids:
        if bus_id not in demand.values:
            issues.append(ValidationIssue(
                "missing_demand", f"load bus {bus_id} has no demand", bus=bus_id))
    return issues


def validate(net: Network, demand: DemandSeries) -> ValidationReport:
    """
    Check every structural invariant of a model.

    Args:
        net: Network to check
        demand: Demand series to check against the network

    Returns:
        ValidationReport listing each violation
    """
    report = ValidationReport(network_issues(net) + demand_issues(net, demand))
    if not report.ok:
        logger.debug(f"[Validate] {len(report.issues)} issue(s): {report.messages()}")
    return report
