"""
Report types shared by the closed-form analyses.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from .segmentation import TauSegmentation


class Infeasible(Enum):
    """Returned in place of h_min when no budget makes the model feasible."""
    ALL_BUDGETS = "infeasible"

    def __str__(self) -> str:
        return "infeasible"


INFEASIBLE = Infeasible.ALL_BUDGETS

BudgetThreshold = Union[float, Infeasible]


def _number(value) -> Any:
    if isinstance(value, Enum):
        return str(value)
    if isinstance(value, (np.floating, np.integer)):
        return float(value)
    return value


@dataclass(frozen=True)
class BranchReport:
    """Per-branch figures of a star network."""
    bus: int
    line_cap: float
    prefix_peak: float
    h_min: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "bus": self.bus,
            "line_cap": self.line_cap,
            "prefix_peak": self.prefix_peak,
            "h_min": self.h_min,
        }


@dataclass
class AnalyticReport:
    """
    Closed-form figures for an SGSL or star model.

    Attributes:
        topology: "sgsl" or "star"
        budget: Budget the figures refer to (math.inf when unbounded)
        cap: Effective cap min(gen cap, line cap); star: the generator cap
        f_min: Minimum cap for feasibility at this budget
        h_min: Minimum feasible budget, or INFEASIBLE
        h_sat: Budget beyond which the optimal cost stays constant
        tau: Segmentation of the (aggregate) demand
        g_unconstrained: Dispatch with every cap and the budget lifted
        feasible: Whether the model is feasible at this budget
        branches: Star branches (empty for SGSL)
    """
    topology: str
    budget: float
    cap: float
    f_min: float
    h_min: BudgetThreshold
    h_sat: float
    tau: TauSegmentation
    g_unconstrained: np.ndarray
    feasible: bool
    unconstrained_cost: Optional[float] = None
    branches: List[BranchReport] = field(default_factory=list)

    def rows(self) -> List[Tuple[str, Any]]:
        """Flat (quantity, value) pairs for text and CSV rendering."""
        rows: List[Tuple[str, Any]] = [
            ("topology", self.topology),
            ("budget", self.budget),
            ("cap", self.cap),
            ("feasible", "yes" if self.feasible else "no"),
            ("f_min", self.f_min),
            ("h_min", _number(self.h_min)),
            ("h_sat", self.h_sat),
            ("tau", " ".join(str(t) for t in self.tau.breakpoints)),
            ("segment_averages", " ".join(f"{a:.12g}" for a in self.tau.averages)),
            ("g_unconstrained", " ".join(f"{g:.12g}" for g in self.g_unconstrained)),
        ]
        if self.unconstrained_cost is not None:
            rows.append(("unconstrained_cost", self.unconstrained_cost))
        for branch in self.branches:
            rows.append((f"branch[{branch.bus}].prefix_peak", branch.prefix_peak))
            rows.append((f"branch[{branch.bus}].h_min", branch.h_min))
        return rows

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary."""
        return {
            "topology": self.topology,
            "budget": self.budget,
            "cap": self.cap,
            "feasible": self.feasible,
            "f_min": self.f_min,
            "h_min": _number(self.h_min),
            "h_sat": self.h_sat,
            "tau": self.tau.to_dict(),
            "g_unconstrained": [float(g) for g in self.g_unconstrained],
            "unconstrained_cost": self.unconstrained_cost,
            "branches": [branch.to_dict() for branch in self.branches],
        }
