"""
Network file reading and writing.

The file is a UTF-8 JSON document:

    {
      "name": "...",                       optional
      "period": T,
      "buses": [{"id": 1, "kind": "generator", "gen_cap": "inf",
                 "cost": {"c2": 1.0, "c1": 0.0, "c0": 0.0}},
                {"id": 2, "kind": "load", "renewable": false}],
      "lines": [{"from": 1, "to": 2, "admittance": 1.0, "flow_cap": 9.5}],
      "storage": {"eff_charge": 1.0, "eff_discharge": 1.0,
                  "ramp_charge": 1.0, "ramp_discharge": 1.0},
      "demand": {"2": [9, 10, 0, 10]},
      "slack_bus": 1,                      optional
      "topology": "sgsl" | "star"          optional
    }

Caps accept the string "inf". Unknown keys are rejected. Semantic checks
(connectivity, bus kinds, lengths) are left to validate().
"""

import json
import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from ..errors import ModelParseError
from .types import Bus, DemandSeries, Line, Network, StorageTech, TopologyKind

logger = logging.getLogger(__name__)


def _reject_constant(token: str) -> float:
    raise ModelParseError(f"Non-finite literal {token} is not allowed (write caps as the string \"inf\")")


class NetworkDocument(BaseModel):
    """On-disk layout of a model file."""

    model_config = ConfigDict(extra="forbid")

    name: Optional[str] = None
    period: int = Field(..., ge=1)
    buses: List[Bus]
    lines: List[Line] = Field(default_factory=list)
    storage: StorageTech = Field(default_factory=StorageTech)
    demand: Dict[int, List[float]] = Field(default_factory=dict)
    slack_bus: Optional[int] = None
    topology: Optional[TopologyKind] = None


def _format_validation_error(exc: ValidationError) -> str:
    parts = []
    for err in exc.errors():
        location = ".".join(str(part) for part in err["loc"])
        parts.append(f"{location}: {err['msg']}")
    return "; ".join(parts)


def parse_network(text: Union[bytes, str]) -> Tuple[Network, DemandSeries]:
    """
    Parse a network file.

    Args:
        text: File contents (bytes are decoded as UTF-8)

    Returns:
        (Network, DemandSeries)

    Raises:
        ModelParseError: on syntax errors (with line/column) or schema errors
    """
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as e:
            raise ModelParseError("Model file is not valid UTF-8", detail=str(e))

    try:
        raw = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as e:
        raise ModelParseError(f"Syntax error: {e.msg}", line=e.lineno, column=e.colno)

    if not isinstance(raw, dict):
        raise ModelParseError("Model file must contain a JSON object at top level")

    try:
        doc = NetworkDocument.model_validate(raw)
    except ValidationError as e:
        raise ModelParseError("Model file does not match the schema", detail=_format_validation_error(e))

    net = Network(
        buses=tuple(doc.buses),
        lines=tuple(doc.lines),
        storage=doc.storage,
        slack_bus=doc.slack_bus,
        topology=doc.topology,
        name=doc.name,
    )
    demand = DemandSeries(
        period=doc.period,
        values={bus_id: tuple(column) for bus_id, column in doc.demand.items()},
    )
    logger.debug(f"[Parser] Parsed {len(net.buses)} buses, {len(net.lines)} lines, T={demand.period}")
    return net, demand


def serialize_network(net: Network, demand: DemandSeries) -> str:
    """Render a model as a network file; parse(serialize(m)) reproduces m."""
    doc = NetworkDocument(
        name=net.name,
        period=demand.period,
        buses=list(net.buses),
        lines=list(net.lines),
        storage=net.storage,
        demand={bus_id: list(column) for bus_id, column in demand.values.items()},
        slack_bus=net.slack_bus,
        topology=net.topology,
    )
    payload = doc.model_dump(mode="json", by_alias=True, exclude_none=True)
    return json.dumps(payload, indent=2) + "\n"


def load_model(path: Union[str, Path]) -> Tuple[Network, DemandSeries]:
    """Read and parse a model file from disk."""
    try:
        data = Path(path).read_bytes()
    except OSError as e:
        raise ModelParseError(f"Cannot read model file {path}", detail=str(e))
    return parse_network(data)


def save_model(path: Union[str, Path], net: Network, demand: DemandSeries) -> None:
    Path(path).write_text(serialize_network(net, demand), encoding="utf-8")
