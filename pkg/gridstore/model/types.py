"""
Domain types for networks, demand and storage technology.

All quantities are per-unit; stored energy is expressed in power units so
no time-step length appears anywhere. Types are frozen pydantic models and
may be shared read-only between worker threads.
"""

import math
from enum import Enum
from typing import Annotated, Dict, List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, field_validator


class Unbounded(Enum):
    """Sentinel for an absent cap (generation, line flow or budget)."""
    INF = "inf"

    def __repr__(self) -> str:
        return "UNBOUNDED"

    def __str__(self) -> str:
        return "inf"


UNBOUNDED = Unbounded.INF

_INF_STRINGS = {"inf", "+inf", "infinity", "+infinity", "unbounded"}


def _coerce_cap(value):
    if isinstance(value, str) and value.strip().lower() in _INF_STRINGS:
        return UNBOUNDED
    if isinstance(value, float) and math.isinf(value) and value > 0:
        return UNBOUNDED
    return value


Cap = Annotated[
    Union[Unbounded, Annotated[float, Field(ge=0)]],
    BeforeValidator(_coerce_cap),
]
PositiveCap = Annotated[
    Union[Unbounded, Annotated[float, Field(gt=0)]],
    BeforeValidator(_coerce_cap),
]


def is_unbounded(cap) -> bool:
    return cap is UNBOUNDED


def cap_value(cap) -> float:
    """Numeric value of a cap, ``math.inf`` for the sentinel."""
    return math.inf if cap is UNBOUNDED else float(cap)


def parse_cap(text: str):
    """Parse a command-line style cap: a nonnegative real or "inf"."""
    value = _coerce_cap(text.strip())
    if value is UNBOUNDED:
        return value
    number = float(value)
    if math.isnan(number) or number < 0:
        raise ValueError(f"cap must be a nonnegative real or 'inf', got {text!r}")
    return UNBOUNDED if math.isinf(number) else number


class BusKind(str, Enum):
    GENERATOR = "generator"
    LOAD = "load"


class CostPoly(BaseModel):
    """Separable generation cost c(g) = c2 g^2 + c1 g + c0."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    c2: float = Field(default=0.0, ge=0, description="Quadratic coefficient")
    c1: float = Field(default=0.0, ge=0, description="Linear coefficient")
    c0: float = Field(default=0.0, ge=0, description="Constant coefficient")

    def value(self, g):
        """Evaluate the cost (scalar or array)."""
        return self.c2 * g * g + self.c1 * g + self.c0

    def derivative(self, g):
        return 2.0 * self.c2 * g + self.c1

    @property
    def strictly_convex(self) -> bool:
        return self.c2 > 0


class Bus(BaseModel):
    """
    A network node.

    Attributes:
        id: Integer bus index
        kind: Generator or load
        gen_cap: Generation capacity (generators only)
        cost: Generation cost (generators only)
        renewable: Load bus whose demand may go negative
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    id: int = Field(..., description="Bus index")
    kind: BusKind = Field(..., description="generator or load")
    gen_cap: Optional[Cap] = Field(default=None, description="Generation capacity")
    cost: Optional[CostPoly] = Field(default=None, description="Generation cost polynomial")
    renewable: bool = Field(default=False, description="Permits negative demand entries")
    name: Optional[str] = Field(default=None, description="Display name")

    @property
    def is_generator(self) -> bool:
        return self.kind == BusKind.GENERATOR


class Line(BaseModel):
    """A transmission line with DC admittance and flow cap."""

    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)

    from_bus: int = Field(..., alias="from", description="Sending bus id")
    to_bus: int = Field(..., alias="to", description="Receiving bus id")
    admittance: float = Field(..., gt=0, description="Line admittance y_kl")
    flow_cap: PositiveCap = Field(default=UNBOUNDED, description="Flow capacity f_kl")

    @property
    def key(self) -> Tuple[int, int]:
        """Unordered endpoint pair, smaller id first."""
        return line_key(self.from_bus, self.to_bus)

    @property
    def label(self) -> str:
        return f"{self.from_bus}-{self.to_bus}"

    def other(self, bus_id: int) -> int:
        return self.to_bus if bus_id == self.from_bus else self.from_bus


def line_key(k: int, l: int) -> Tuple[int, int]:
    return (k, l) if k <= l else (l, k)


class DemandSeries(BaseModel):
    """Periodic per-load-bus demand d_k(t), t = 1..T."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    period: int = Field(..., ge=1, description="Cycle length T")
    values: Dict[int, Tuple[float, ...]] = Field(default_factory=dict, description="Bus id to T demands")

    def column(self, bus_id: int) -> np.ndarray:
        """Demand of one bus as an array (zeros when the bus has no column)."""
        if bus_id not in self.values:
            return np.zeros(self.period)
        return np.asarray(self.values[bus_id], dtype=float)

    def at(self, bus_id: int, t: int) -> float:
        """Demand at 1-based time t, extended periodically."""
        column = self.values.get(bus_id)
        if column is None:
            return 0.0
        return float(column[(t - 1) % self.period])

    def total(self) -> np.ndarray:
        total = np.zeros(self.period)
        for column in self.values.values():
            if len(column) == self.period:
                total += np.asarray(column, dtype=float)
        return total


class StorageTech(BaseModel):
    """Storage technology shared by every bus."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    eff_charge: float = Field(default=1.0, gt=0, le=1, description="Charging efficiency alpha_gamma")
    eff_discharge: float = Field(default=1.0, gt=0, le=1, description="Discharging efficiency alpha_delta")
    ramp_charge: float = Field(default=1.0, gt=0, description="Charging ramp fraction epsilon_gamma")
    ramp_discharge: float = Field(default=1.0, gt=0, description="Discharging ramp fraction epsilon_delta")
    initial_level: float = Field(default=0.0, description="Storage level at t=0 (must be 0)")

    @property
    def roundtrip(self) -> float:
        return self.eff_charge * self.eff_discharge

    @property
    def is_ideal(self) -> bool:
        """Lossless with unit ramp fractions."""
        return (
            self.eff_charge == 1.0
            and self.eff_discharge == 1.0
            and self.ramp_charge == 1.0
            and self.ramp_discharge == 1.0
        )


class TopologyKind(str, Enum):
    SGSL = "sgsl"
    STAR = "star"
    GENERAL = "general"


class Network(BaseModel):
    """Buses, lines, storage technology and slack bus of a DC network."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    buses: Tuple[Bus, ...] = Field(..., description="Network buses")
    lines: Tuple[Line, ...] = Field(default=(), description="Transmission lines")
    storage: StorageTech = Field(default_factory=StorageTech, description="Storage technology")
    slack_bus: Optional[int] = Field(default=None, description="Slack bus (lowest generator when omitted)")
    topology: Optional[TopologyKind] = Field(default=None, description="Declared topology tag")
    name: Optional[str] = Field(default=None, description="Model name")

    @field_validator("buses", "lines", mode="before")
    @classmethod
    def _listify(cls, value):
        return tuple(value) if isinstance(value, list) else value

    @property
    def bus_ids(self) -> List[int]:
        return sorted(bus.id for bus in self.buses)

    @property
    def generator_ids(self) -> List[int]:
        return sorted(bus.id for bus in self.buses if bus.kind == BusKind.GENERATOR)

    @property
    def load_ids(self) -> List[int]:
        return sorted(bus.id for bus in self.buses if bus.kind == BusKind.LOAD)

    @property
    def slack_id(self) -> int:
        """Declared slack bus, else the lowest-index generator."""
        if self.slack_bus is not None:
            return self.slack_bus
        generators = self.generator_ids
        return generators[0] if generators else self.bus_ids[0]

    def bus(self, bus_id: int) -> Bus:
        for bus in self.buses:
            if bus.id == bus_id:
                return bus
        raise KeyError(bus_id)

    def has_bus(self, bus_id: int) -> bool:
        return any(bus.id == bus_id for bus in self.buses)

    def line_between(self, k: int, l: int) -> Optional[Line]:
        key = line_key(k, l)
        for line in self.lines:
            if line.key == key:
                return line
        return None

    def incident_lines(self, bus_id: int) -> List[Line]:
        return [line for line in self.lines if bus_id in (line.from_bus, line.to_bus)]

    def neighbors(self, bus_id: int) -> List[int]:
        return sorted({line.other(bus_id) for line in self.incident_lines(bus_id)})
