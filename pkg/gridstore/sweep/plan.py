"""
Sweep plans: which parameter to vary, over which grid, for which pinned-zero
variants.
"""

import math
from enum import Enum
from typing import FrozenSet, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from ..errors import ErrorCode, UsageError
from ..model.types import UNBOUNDED, BusKind, DemandSeries, Network, TopologyKind
from ..model.topology import detect_topology
from ..program.spec import ProblemSpec, variant_label


class SweepParameter(str, Enum):
    BUDGET = "budget"
    LINE = "line"
    GEN = "gen"
    CAP = "cap"


def parse_grid(text: str) -> List[float]:
    """
    Parse a grid given as START:STOP:NUM (inclusive linspace) or v1,v2,...

    Raises:
        UsageError: malformed grid
    """
    text = text.strip()
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3:
                raise ValueError("expected START:STOP:NUM")
            start, stop, num = float(parts[0]), float(parts[1]), int(parts[2])
            if num < 0:
                raise ValueError("NUM must be nonnegative")
            return [float(v) for v in np.linspace(start, stop, num)]
        if not text:
            return []
        return [float(v) for v in text.split(",")]
    except ValueError as e:
        raise UsageError(f"Invalid grid '{text}'", detail=str(e)) from e


def parse_variant(text: str) -> FrozenSet[int]:
    """Parse a pinned-zero variant: "none" or comma/plus separated bus ids."""
    text = text.strip().lower()
    if text in ("", "none", "{}"):
        return frozenset()
    try:
        return frozenset(int(v) for v in text.replace("+", ",").split(",") if v.strip())
    except ValueError as e:
        raise UsageError(f"Invalid variant '{text}'", detail="expected 'none' or bus ids like 1,2") from e


def parse_line_target(text: str) -> Tuple[int, int]:
    try:
        k, l = text.split("-")
        return int(k), int(l)
    except ValueError as e:
        raise UsageError(f"Invalid line target '{text}'", detail="expected K-L, e.g. 1-2") from e


class SweepPlan(BaseModel):
    """
    A parameter sweep over one model.

    Attributes:
        network: Network to sweep
        demand: Demand series
        base_spec: Spec every grid point starts from
        parameter: Swept parameter
        target: Line "k-l" for line sweeps, bus id for generator sweeps
        grid: Strictly increasing parameter values
        variants: Pinned-zero sets compared at every grid point
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    network: Network = Field(..., description="Network to sweep")
    demand: DemandSeries = Field(..., description="Demand series")
    base_spec: ProblemSpec = Field(default_factory=ProblemSpec, description="Spec before the swept change")
    parameter: SweepParameter = Field(default=SweepParameter.BUDGET, description="Swept parameter")
    target: Optional[Union[int, str]] = Field(default=None, description="Line k-l or generator bus id")
    grid: Tuple[float, ...] = Field(default=(), description="Parameter values")
    variants: Tuple[FrozenSet[int], ...] = Field(default=(frozenset(),), description="Pinned-zero sets")

    @field_validator("grid", mode="after")
    @classmethod
    def _check_grid(cls, value):
        for a, b in zip(value, value[1:]):
            if not b > a:
                raise ValueError(f"grid must be strictly increasing, got {a} then {b}")
        for v in value:
            if math.isnan(v) or v < 0:
                raise ValueError(f"grid values must be nonnegative, got {v}")
        return value

    @field_validator("variants", mode="after")
    @classmethod
    def _check_variants(cls, value):
        if not value:
            raise ValueError("at least one variant is required")
        return value

    @property
    def variant_labels(self) -> List[str]:
        return [variant_label(v) for v in self.variants]

    def check(self) -> None:
        """
        Resolve the target and variants against the network.

        Raises:
            UsageError: target missing or unknown, or a variant names a
                non-generator bus
        """
        net = self.network
        if self.parameter == SweepParameter.LINE:
            if self.target is None:
                raise UsageError("Line sweeps need --target K-L")
            k, l = parse_line_target(str(self.target))
            if net.line_between(k, l) is None:
                raise UsageError(f"No line between buses {k} and {l}", error_code=ErrorCode.UNKNOWN_BUS)
        elif self.parameter == SweepParameter.GEN:
            if self.target is None:
                raise UsageError("Generator sweeps need --target BUS")
            try:
                bus_id = int(self.target)
            except ValueError as e:
                raise UsageError(f"Invalid generator target '{self.target}'", detail="expected a bus id") from e
            if not net.has_bus(bus_id):
                raise UsageError(f"Unknown bus {bus_id}", error_code=ErrorCode.UNKNOWN_BUS)
            if net.bus(bus_id).kind != BusKind.GENERATOR:
                raise UsageError(f"Bus {bus_id} is not a generator", error_code=ErrorCode.NOT_A_GENERATOR)
        elif self.parameter == SweepParameter.CAP:
            if detect_topology(net) != TopologyKind.SGSL:
                raise UsageError(
                    "Cap sweeps apply to SGSL models only",
                    error_code=ErrorCode.TOPOLOGY_UNSUPPORTED,
                    suggestions=["Use --param line or --param gen on larger networks"],
                )
        for variant in self.variants:
            for bus_id in sorted(variant):
                if not net.has_bus(bus_id):
                    raise UsageError(f"Variant names unknown bus {bus_id}", error_code=ErrorCode.UNKNOWN_BUS)
                if net.bus(bus_id).kind != BusKind.GENERATOR:
                    raise UsageError(
                        f"Variant pins non-generator bus {bus_id}",
                        error_code=ErrorCode.NOT_A_GENERATOR,
                    )

    def spec_at(self, value: float, variant: FrozenSet[int]) -> ProblemSpec:
        """Spec for one grid value and variant."""
        cap = UNBOUNDED if math.isinf(value) else float(value)
        spec = self.base_spec.with_pinned(variant)
        if self.parameter == SweepParameter.BUDGET:
            return spec.with_budget(cap)
        if self.parameter == SweepParameter.LINE:
            k, l = parse_line_target(str(self.target))
            return spec.with_line_cap(k, l, cap)
        if self.parameter == SweepParameter.GEN:
            return spec.with_gen_cap(int(self.target), cap)
        return spec.with_all_caps(self.network, cap)


def make_plan(
    network: Network,
    demand: DemandSeries,
    parameter: Union[SweepParameter, str],
    grid: Sequence[float],
    variants: Sequence[FrozenSet[int]] = (frozenset(),),
    target: Optional[Union[int, str]] = None,
    base_spec: Optional[ProblemSpec] = None,
) -> SweepPlan:
    """Build a plan, turning grid and variant problems into UsageError."""
    try:
        return SweepPlan(
            network=network,
            demand=demand,
            base_spec=base_spec or ProblemSpec(),
            parameter=SweepParameter(parameter),
            target=target,
            grid=tuple(float(v) for v in grid),
            variants=tuple(frozenset(v) for v in variants),
        )
    except ValidationError as e:
        messages = "; ".join(err["msg"] for err in e.errors())
        raise UsageError("Invalid sweep plan", detail=messages) from e
    except ValueError as e:
        raise UsageError("Invalid sweep plan", detail=str(e)) from e
