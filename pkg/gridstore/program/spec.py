"""
Problem specification: storage budget, pinned-zero buses and cap overrides.
"""

from typing import Dict, FrozenSet, Iterable, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator

from ..model.types import UNBOUNDED, Cap, Line, Network, line_key


class ProblemSpec(BaseModel):
    """
    Parameters selecting problem P (no pins) or its restriction to K.

    Attributes:
        budget: Total storage budget h, or UNBOUNDED
        pinned_zero: Generator buses whose capacity is forced to zero
        line_caps: Flow cap replacements keyed by unordered bus pair
        gen_caps: Generation cap replacements keyed by bus id
        net_storage: Use the net-storage formulation (lossless storage only)
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    budget: Cap = Field(default=UNBOUNDED, description="Storage budget h")
    pinned_zero: FrozenSet[int] = Field(default_factory=frozenset, description="Pinned-zero set K")
    line_caps: Dict[Tuple[int, int], Cap] = Field(default_factory=dict, description="Line cap overrides")
    gen_caps: Dict[int, Cap] = Field(default_factory=dict, description="Generator cap overrides")
    net_storage: bool = Field(default=False, description="Net-storage formulation")

    @field_validator("line_caps", mode="after")
    @classmethod
    def _normalize_line_keys(cls, value):
        return {line_key(k, l): cap for (k, l), cap in value.items()}

    def with_budget(self, budget) -> "ProblemSpec":
        return self.model_copy(update={"budget": budget})

    def with_pinned(self, buses: Iterable[int]) -> "ProblemSpec":
        return self.model_copy(update={"pinned_zero": frozenset(buses)})

    def with_line_cap(self, k: int, l: int, cap) -> "ProblemSpec":
        caps = dict(self.line_caps)
        caps[line_key(k, l)] = cap
        return self.model_copy(update={"line_caps": caps})

    def with_gen_cap(self, bus_id: int, cap) -> "ProblemSpec":
        caps = dict(self.gen_caps)
        caps[bus_id] = cap
        return self.model_copy(update={"gen_caps": caps})

    def with_all_caps(self, net: Network, cap) -> "ProblemSpec":
        """Set every generator cap and every line cap to one value."""
        return self.model_copy(update={
            "gen_caps": {bus_id: cap for bus_id in net.generator_ids},
            "line_caps": {line.key: cap for line in net.lines},
        })

    def line_cap_for(self, line: Line):
        return self.line_caps.get(line.key, line.flow_cap)

    def gen_cap_for(self, net: Network, bus_id: int):
        if bus_id in self.gen_caps:
            return self.gen_caps[bus_id]
        return net.bus(bus_id).gen_cap

    def variant_label(self) -> str:
        return variant_label(self.pinned_zero)


def variant_label(pinned: Optional[Iterable[int]]) -> str:
    """Stable text label for a pinned-zero set ("none" for the empty set)."""
    buses = sorted(pinned or ())
    return "+".join(str(bus) for bus in buses) if buses else "none"
