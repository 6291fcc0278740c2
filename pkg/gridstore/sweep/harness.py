"""
Sweep runner: one cold solve per grid point and variant on a thread pool,
results gathered by index so their order never depends on scheduling.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, List, Optional, TextIO, Union

import numpy as np
import pandas as pd

from ..config import default_thread_count
from ..model.validation import validate
from ..program.builder import build
from ..program.spec import variant_label
from ..solver.base import InfeasibilityCertificate, SolverConfig, SolverStatus
from ..solver.ipm import solve
from .plan import SweepPlan

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["param", "variant", "status", "objective", "iters", "max_residual"]


@dataclass
class SweepPoint:
    """Outcome of one solve in a sweep."""
    index: int
    value: float
    variant: str
    status: SolverStatus
    objective: float
    iterations: int
    max_residual: float
    certificate: Optional[InfeasibilityCertificate] = None

    @property
    def is_optimal(self) -> bool:
        return self.status == SolverStatus.OPTIMAL

    def to_dict(self) -> Dict[str, Any]:
        return {
            "param": self.value,
            "variant": self.variant,
            "status": self.status.value,
            "objective": self.objective,
            "iters": self.iterations,
            "max_residual": self.max_residual,
        }


@dataclass
class SweepResult:
    """
    All points of a sweep, ordered by grid index then variant.

    Derived quantities only look at optimal points; non-optimal objectives
    are NaN.
    """
    parameter: str
    grid: List[float]
    variants: List[str]
    points: List[SweepPoint] = field(default_factory=list)

    def series(self, variant: Union[str, FrozenSet[int]] = "none") -> List[SweepPoint]:
        label = variant if isinstance(variant, str) else variant_label(variant)
        return [point for point in self.points if point.variant == label]

    def objectives(self, variant: Union[str, FrozenSet[int]] = "none") -> np.ndarray:
        return np.array([
            point.objective if point.is_optimal else np.nan for point in self.series(variant)
        ])

    def first_feasible_index(self, variant: Union[str, FrozenSet[int]] = "none") -> Optional[int]:
        for point in self.series(variant):
            if point.is_optimal:
                return point.index
        return None

    def plateau_index(self, variant: Union[str, FrozenSet[int]] = "none", rtol: float = 1e-6) -> Optional[int]:
        """Smallest grid index from which every objective equals the last one."""
        values = self.objectives(variant)
        if values.size == 0 or np.isnan(values[-1]):
            return None
        last = values[-1]
        index = len(values) - 1
        while index > 0:
            previous = values[index - 1]
            if np.isnan(previous) or abs(previous - last) > rtol * (1.0 + abs(last)):
                break
            index -= 1
        return index

    def convexity_violations(self, variant: Union[str, FrozenSet[int]] = "none", slack: float = 1e-6) -> int:
        """Count of optimal triples lying above the chord of their neighbors."""
        values = self.objectives(variant)
        grid = self.grid
        count = 0
        for i in range(1, len(values) - 1):
            left, mid, right = values[i - 1], values[i], values[i + 1]
            if np.isnan(left) or np.isnan(mid) or np.isnan(right):
                continue
            if np.isinf(grid[i + 1]):
                continue
            w = (grid[i] - grid[i - 1]) / (grid[i + 1] - grid[i - 1])
            chord = (1.0 - w) * left + w * right
            if mid > chord + slack * (1.0 + abs(mid)):
                count += 1
        return count

    def is_nonincreasing(self, variant: Union[str, FrozenSet[int]] = "none", slack: float = 1e-6) -> bool:
        values = [v for v in self.objectives(variant) if not np.isnan(v)]
        return all(b <= a + slack * (1.0 + abs(a)) for a, b in zip(values, values[1:]))

    def coincidence_index(self, a: Union[str, FrozenSet[int]], b: Union[str, FrozenSet[int]],
                          rtol: float = 1e-6) -> Optional[int]:
        """Smallest grid index from which both variants are optimal and agree."""
        left, right = self.objectives(a), self.objectives(b)
        if left.size == 0:
            return None
        index = None
        for i in range(len(left) - 1, -1, -1):
            if np.isnan(left[i]) or np.isnan(right[i]):
                break
            if abs(left[i] - right[i]) > rtol * (1.0 + abs(left[i])):
                break
            index = i
        return index

    def to_dataframe(self) -> pd.DataFrame:
        return pd.DataFrame([point.to_dict() for point in self.points], columns=CSV_COLUMNS)

    def write_csv(self, target: Union[str, TextIO]) -> None:
        """Write one row per (grid point, variant) with 12 significant digits."""
        self.to_dataframe().to_csv(target, index=False, float_format="%.12g", na_rep="nan", lineterminator="\n")

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary."""
        return {
            "parameter": self.parameter,
            "grid": list(self.grid),
            "variants": list(self.variants),
            "points": [point.to_dict() for point in self.points],
        }


def _solve_point(plan: SweepPlan, index: int, value: float, variant: FrozenSet[int],
                 config: SolverConfig) -> SweepPoint:
    program = build(plan.network, plan.demand, plan.spec_at(value, variant))
    sol = solve(program, config)
    return SweepPoint(
        index=index,
        value=value,
        variant=variant_label(variant),
        status=sol.status,
        objective=sol.objective if sol.is_optimal() else float("nan"),
        iterations=sol.iterations,
        max_residual=sol.max_residual(),
        certificate=sol.certificate,
    )


def run_sweep(
    plan: SweepPlan,
    solver_config: Optional[SolverConfig] = None,
    workers: Optional[int] = None,
) -> SweepResult:
    """
    Solve every (grid point, variant) pair of a plan.

    Args:
        plan: Sweep plan
        solver_config: Solver settings
        workers: Thread pool size (physical core count by default)

    Returns:
        SweepResult ordered by grid index, then variant order of the plan

    Raises:
        ModelValidationError: model fails validation
        UsageError: target or variants do not resolve in the model
    """
    validate(plan.network, plan.demand).raise_if_invalid()
    plan.check()
    config = solver_config or SolverConfig()
    result = SweepResult(
        parameter=plan.parameter.value,
        grid=list(plan.grid),
        variants=plan.variant_labels,
    )
    tasks = [
        (index, value, variant)
        for index, value in enumerate(plan.grid)
        for variant in plan.variants
    ]
    if not tasks:
        return result

    pool_size = max(1, min(workers or default_thread_count(), len(tasks)))
    logger.info(
        f"[Sweep] {plan.parameter.value}: {len(plan.grid)} grid points x "
        f"{len(plan.variants)} variants on {pool_size} threads"
    )
    with ThreadPoolExecutor(max_workers=pool_size) as executor:
        futures = [
            executor.submit(_solve_point, plan, index, value, variant, config)
            for index, value, variant in tasks
        ]
        result.points = [future.result() for future in futures]

    failed = [p for p in result.points if p.status not in (SolverStatus.OPTIMAL, SolverStatus.INFEASIBLE)]
    if failed:
        logger.warning(f"[Sweep] {len(failed)} points ended without a verdict ({failed[0].status.value} first)")
    return result
