"""
Grid model: domain types, validation, topology queries and file I/O.
"""

from .types import (
    UNBOUNDED,
    Bus,
    BusKind,
    Cap,
    CostPoly,
    DemandSeries,
    Line,
    Network,
    StorageTech,
    TopologyKind,
    Unbounded,
    cap_value,
    is_unbounded,
    line_key,
    parse_cap,
)
from .validation import ValidationIssue, ValidationReport, validate
from .topology import BusPartition, classify_buses, detect_topology, resolve_topology, to_graph, unique_neighbor
from .io import load_model, parse_network, save_model, serialize_network

__all__ = [
    "UNBOUNDED",
    "Bus",
    "BusKind",
    "BusPartition",
    "Cap",
    "CostPoly",
    "DemandSeries",
    "Line",
    "Network",
    "StorageTech",
    "TopologyKind",
    "Unbounded",
    "ValidationIssue",
    "ValidationReport",
    "cap_value",
    "classify_buses",
    "detect_topology",
    "is_unbounded",
    "line_key",
    "load_model",
    "parse_cap",
    "parse_network",
    "resolve_topology",
    "save_model",
    "serialize_network",
    "to_graph",
    "unique_neighbor",
    "validate",
]
