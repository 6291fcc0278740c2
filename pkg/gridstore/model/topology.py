"""
Graph queries on a network: connectivity, bus partition, topology class.
"""

import logging
from dataclasses import dataclass
from typing import FrozenSet, Optional

import networkx as nx

from ..errors import ErrorCode, ModelValidationError
from .types import Network, TopologyKind

logger = logging.getLogger(__name__)


def to_graph(net: Network) -> nx.Graph:
    """Undirected graph with one node per bus and one edge per line."""
    graph = nx.Graph()
    for bus in net.buses:
        graph.add_node(bus.id, kind=bus.kind.value)
    for line in net.lines:
        graph.add_edge(line.from_bus, line.to_bus, admittance=line.admittance)
    return graph


@dataclass(frozen=True)
class BusPartition:
    """
    Generator, load and single-connection generator bus sets.

    Attributes:
        generators: N_G
        loads: N_D
        single_connection: generator buses with exactly one neighbor
    """
    generators: FrozenSet[int]
    loads: FrozenSet[int]
    single_connection: FrozenSet[int]


def classify_buses(net: Network) -> BusPartition:
    """
    Partition the buses and find single-connection generators.

    Raises:
        ModelValidationError: if the network itself is malformed
    """
    from .validation import network_issues

    issues = network_issues(net)
    if issues:
        raise ModelValidationError(
            "Cannot classify buses of an invalid network",
            detail="; ".join(issue.message for issue in issues),
        )

    graph = to_graph(net)
    generators = frozenset(net.generator_ids)
    loads = frozenset(net.load_ids)
    single = frozenset(k for k in generators if graph.degree(k) == 1)
    return BusPartition(generators=generators, loads=loads, single_connection=single)


def unique_neighbor(net: Network, bus_id: int) -> Optional[int]:
    """The only neighbor of a single-connection bus, else None."""
    neighbors = net.neighbors(bus_id)
    return neighbors[0] if len(neighbors) == 1 else None


def detect_topology(net: Network) -> TopologyKind:
    """
    Classify the network as SGSL, star or general.

    SGSL: exactly two buses (one generator, one load).
    Star: a single generator adjacent to every load and no load-load lines.
    """
    generators = net.generator_ids
    loads = net.load_ids
    if len(net.buses) == 2 and len(generators) == 1 and len(loads) == 1 and len(net.lines) == 1:
        return TopologyKind.SGSL
    if len(generators) == 1 and loads:
        center = generators[0]
        if set(net.neighbors(center)) == set(loads):
            if all(center in (line.from_bus, line.to_bus) for line in net.lines):
                return TopologyKind.STAR
    return TopologyKind.GENERAL


def resolve_topology(net: Network) -> TopologyKind:
    """Detected topology, checked against the declared tag when one is present."""
    detected = detect_topology(net)
    declared = net.topology
    if declared is None or declared == TopologyKind.GENERAL:
        return detected
    if declared == TopologyKind.STAR and detected == TopologyKind.SGSL:
        return TopologyKind.STAR
    if declared != detected:
        raise ModelValidationError(
            f"Model is tagged '{declared.value}' but its graph is '{detected.value}'",
            error_code=ErrorCode.TOPOLOGY_UNSUPPORTED,
            suggestions=["Remove the topology tag or fix the line list"],
        )
    return detected
