"""
Optimality and infeasibility certificates.

Infeasibility is decided by an elastic phase-1 linear program

    minimize    1'u + 1'v + 1'w
    subject to  A x + u - v = b,   G x - w <= h,   u, v, w >= 0

solved with HiGHS. A positive optimum means the original constraints are
inconsistent, and the phase-1 duals form a Farkas certificate.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from ..errors import ErrorCode, SolverError
from ..program.program import ConvexProgram
from .base import InfeasibilityCertificate, Solution, SolverConfig

logger = logging.getLogger(__name__)


@dataclass
class PhaseOneResult:
    feasible: bool
    objective: float
    x: np.ndarray
    certificate: Optional[InfeasibilityCertificate] = None


def phase_one(program: ConvexProgram, config: SolverConfig) -> Optional[PhaseOneResult]:
    """
    Decide feasibility of the constraint set.

    Returns:
        PhaseOneResult, or None when there are no constraints or HiGHS
        fails (the caller then proceeds without a verdict)
    """
    n, p, m = program.n_vars, program.n_eq, program.n_in
    if p == 0 and m == 0:
        return None

    cost = np.concatenate([np.zeros(n), np.ones(2 * p + m)])
    bounds = [(None, None)] * n + [(0, None)] * (2 * p + m)

    a_eq = b_eq = a_ub = b_ub = None
    if p:
        eye_p = sp.identity(p, format="csr")
        a_eq = sp.hstack([program.a_eq, eye_p, -eye_p, sp.csr_matrix((p, m))], format="csr")
        b_eq = program.b_eq
    if m:
        a_ub = sp.hstack(
            [program.a_in, sp.csr_matrix((m, 2 * p)), -sp.identity(m, format="csr")], format="csr"
        )
        b_ub = program.b_in

    result = linprog(cost, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq, bounds=bounds, method="highs")
    if result.status != 0:
        logger.warning(f"[Phase1] HiGHS did not solve the phase-1 problem: {result.message}")
        return None

    violation = float(result.fun)
    x = np.asarray(result.x[:n], dtype=float)
    if violation <= config.infeasibility_threshold:
        return PhaseOneResult(feasible=True, objective=violation, x=x)

    y = -np.asarray(result.eqlin.marginals, dtype=float) if p else np.zeros(0)
    z = -np.asarray(result.ineqlin.marginals, dtype=float) if m else np.zeros(0)
    certificate = InfeasibilityCertificate(y_eq=y, z_in=np.maximum(z, 0.0), phase1_objective=violation)
    return PhaseOneResult(feasible=False, objective=violation, x=x, certificate=certificate)


@dataclass
class KKTReport:
    """
    First-order optimality residuals of a primal-dual pair.

    Attributes:
        stationarity: ||Qx + c + A'y + G'z||_inf
        primal_eq: ||Ax - b||_inf
        primal_in: max(Gx - h, 0)
        complementarity: max |z_i (h - Gx)_i|
        dual_feasibility: min z_i (should be >= 0)
        gap: relative duality gap reported by the solver
        duals_by_tag: multipliers grouped by row tag
    """
    stationarity: float
    primal_eq: float
    primal_in: float
    complementarity: float
    dual_feasibility: float
    gap: float
    duals_by_tag: Dict[str, np.ndarray] = field(default_factory=dict)

    def max_residual(self) -> float:
        return max(
            self.stationarity,
            self.primal_eq,
            self.primal_in,
            self.complementarity,
            max(-self.dual_feasibility, 0.0),
        )

    def passed(self, tol: float = 1e-6) -> bool:
        return self.max_residual() <= tol

    def accepted(self, config: SolverConfig) -> bool:
        return self.passed(10.0 * config.tol_gap)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "stationarity": self.stationarity,
            "primal_eq": self.primal_eq,
            "primal_in": self.primal_in,
            "complementarity": self.complementarity,
            "dual_feasibility": self.dual_feasibility,
            "gap": self.gap,
        }


def _require_duals(sol: Solution) -> None:
    if not sol.is_optimal():
        raise SolverError(
            f"KKT report needs an optimal solution, got {sol.status.value}",
            error_code=ErrorCode.NOT_OPTIMAL,
        )
    if sol.y is None or sol.z is None:
        raise SolverError("Solution carries no multipliers", error_code=ErrorCode.NOT_OPTIMAL)


def kkt_report(program: ConvexProgram, sol: Solution) -> KKTReport:
    """Stationarity, feasibility and complementary-slackness residuals."""
    _require_duals(sol)
    x, y, z = sol.x, sol.y, sol.z
    grad = program.q_diag * x + program.c + program.a_eq.T @ y + program.a_in.T @ z
    slack = program.b_in - program.a_in @ x
    eq_res = program.a_eq @ x - program.b_eq

    by_tag: Dict[str, list] = {}
    for info, value in zip(program.eq_rows, y):
        by_tag.setdefault(info.tag, []).append(value)
    for info, value in zip(program.in_rows, z):
        by_tag.setdefault(info.tag, []).append(value)

    def norm(v):
        return float(np.max(np.abs(v))) if v.size else 0.0

    return KKTReport(
        stationarity=norm(grad),
        primal_eq=norm(eq_res),
        primal_in=float(max(np.max(-slack), 0.0)) if slack.size else 0.0,
        complementarity=norm(z * slack),
        dual_feasibility=float(np.min(z)) if z.size else 0.0,
        gap=sol.gap,
        duals_by_tag={tag: np.asarray(values) for tag, values in by_tag.items()},
    )


def balance_prices(program: ConvexProgram, sol: Solution) -> np.ndarray:
    """Power-balance multipliers as (buses x T)."""
    _require_duals(sol)
    buses = program.network.bus_ids
    prices = np.zeros((len(buses), program.period))
    for i, k in enumerate(buses):
        for t in range(1, program.period + 1):
            _, row = program.row(f"balance:bus={k}:t={t}")
            prices[i, t - 1] = sol.y[row]
    return prices


def storage_duals(program: ConvexProgram, sol: Solution, bus: int, side: str = "lower") -> np.ndarray:
    """Multipliers of the storage-level rows of one bus (``lower``: s >= 0, ``upper``: s <= b)."""
    _require_duals(sol)
    duals = np.zeros(program.period)
    for t in range(1, program.period + 1):
        _, row = program.row(f"level:{side}:bus={bus}:t={t}")
        duals[t - 1] = sol.z[row]
    return duals
