"""
Solver configuration and result types.
"""

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field


class SolverStatus(str, Enum):
    """Solve outcome."""
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    ITER_LIMIT = "iter_limit"


class SolverConfig(BaseModel):
    """Interior-point solver settings."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    max_iters: int = Field(default=100, ge=1, description="Iteration limit")
    tol_gap: float = Field(default=1e-8, gt=0, description="Relative duality-gap tolerance")
    tol_feas: float = Field(default=1e-8, gt=0, description="Feasibility tolerance")
    infeasibility_threshold: float = Field(default=1e-6, gt=0, description="Phase-1 infeasibility threshold")
    regularization: float = Field(default=1e-9, gt=0, description="KKT system regularization")
    dense_threshold: int = Field(default=500, ge=1, description="Dense factorization below this many variables")
    verbose: bool = Field(default=False, description="Log every iterate at DEBUG")


@dataclass
class InfeasibilityCertificate:
    """
    Farkas-type certificate (y, z) for {A_eq x = b_eq, A_in x <= b_in}.

    Valid when A_eq'y + A_in'z = 0, z >= 0 and b_eq'y + b_in'z < 0.
    """
    y_eq: np.ndarray
    z_in: np.ndarray
    phase1_objective: float

    def check(self, program, tol: float = 1e-6) -> Dict[str, float]:
        combo = program.a_eq.T @ self.y_eq + program.a_in.T @ self.z_in
        scale = max(1.0, float(np.max(np.abs(self.y_eq), initial=0.0)), float(np.max(self.z_in, initial=0.0)))
        return {
            "stationarity": float(np.max(np.abs(combo), initial=0.0)) / scale,
            "min_z": float(np.min(self.z_in, initial=0.0)) / scale,
            "bound": float(program.b_eq @ self.y_eq + program.b_in @ self.z_in),
        }

    def is_valid(self, program, tol: float = 1e-6) -> bool:
        checks = self.check(program, tol)
        return checks["stationarity"] <= tol and checks["min_z"] >= -tol and checks["bound"] < 0.0


@dataclass
class Solution:
    """
    Result of a solve.

    Attributes:
        status: Solve outcome
        x: Primal point (all program columns)
        y: Equality multipliers (None when unavailable)
        z: Inequality multipliers, nonnegative (None when unavailable)
        objective: Primal objective at x
        dual_objective: Dual objective bound
        gap: Relative duality gap
        iterations: Interior-point iterations used
        program: The program that was solved
        certificate: Attached when status is INFEASIBLE
        history: Per-iteration (pobj, dobj) pairs
    """
    status: SolverStatus
    x: np.ndarray
    y: Optional[np.ndarray]
    z: Optional[np.ndarray]
    objective: float
    dual_objective: float
    gap: float
    iterations: int
    program: Any
    certificate: Optional[InfeasibilityCertificate] = None
    history: List[Dict[str, float]] = field(default_factory=list)
    message: str = ""

    def is_optimal(self) -> bool:
        return self.status == SolverStatus.OPTIMAL

    def max_residual(self) -> float:
        return self.program.residuals(self.x).max_violation

    def with_point(self, x: np.ndarray, **changes) -> "Solution":
        """Copy with a new primal point and objective re-evaluated."""
        x = np.asarray(x, dtype=float)
        changes.setdefault("objective", self.program.eval_objective(x))
        return replace(self, x=x, **changes)

    # --- profile access -------------------------------------------------

    def block(self, name: str) -> np.ndarray:
        """One variable block as (keys x T), or a vector for untimed blocks."""
        variables = self.program.variables
        if name in ("gamma", "delta") and variables.has_block("r"):
            r = self.block("r")
            return np.maximum(r, 0.0) if name == "gamma" else np.maximum(-r, 0.0)
        block = variables.block(name)
        values = self.x[variables.slice(name)]
        if block.period is None:
            return values.copy()
        return values.reshape(len(block.keys), block.period).copy()

    def profile(self, name: str, key) -> np.ndarray:
        variables = self.program.variables
        block_name = "r" if name in ("gamma", "delta") and variables.has_block("r") else name
        position = variables.block(block_name).keys.index(key)
        return self.block(name)[position]

    def capacities(self) -> Dict[int, float]:
        keys = self.program.variables.block("b").keys
        return {k: float(v) for k, v in zip(keys, self.block("b"))}

    def storage_levels(self) -> np.ndarray:
        """s_k(t) for every bus as (buses x T)."""
        tech = self.program.network.storage
        if self.program.variables.has_block("r"):
            inflow = self.block("r")
        else:
            inflow = tech.eff_charge * self.block("gamma") - self.block("delta") / tech.eff_discharge
        return np.cumsum(inflow, axis=1)

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary."""
        return {
            "status": self.status.value,
            "objective": self.objective,
            "dual_objective": self.dual_objective,
            "gap": self.gap,
            "iterations": self.iterations,
            "message": self.message,
        }
