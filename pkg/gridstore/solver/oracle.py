"""
Low-accuracy verification oracle.

An operator-splitting (ADMM) iteration in the style of OSQP, independent
of the interior-point code path:

    minimize 1/2 x'Qx + c'x  subject to  l <= C x <= u,
    C = [A_eq; A_in],  l = [b_eq; -inf],  u = [b_eq; b_in].

Only tests and verification campaigns use it.
"""

import logging
from dataclasses import dataclass, field
from typing import List

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from ..program.program import ConvexProgram

logger = logging.getLogger(__name__)

SIGMA = 1e-6
RELAXATION = 1.6
RHO_START = 0.1
RHO_MIN = 1e-6
RHO_MAX = 1e6
EQUALITY_RHO_SCALE = 1e3
ADAPT_INTERVAL = 200
CHECK_INTERVAL = 50


@dataclass
class OracleResult:
    """
    Oracle outcome.

    Attributes:
        x: Final iterate
        objective: Objective at x
        max_residual: Largest constraint violation at x
        history: Primal residual ||Cx - z|| at each check
        iterations: Iterations performed
        converged: Stopped early on the residual tolerance
    """
    x: np.ndarray
    objective: float
    max_residual: float
    history: List[float] = field(default_factory=list)
    iterations: int = 0
    converged: bool = False


def oracle_solve(program: ConvexProgram, iters: int = 20000, eps: float = 1e-8) -> OracleResult:
    """
    Run the ADMM oracle.

    Args:
        program: Program to minimize
        iters: Iteration budget
        eps: Absolute residual tolerance for early stopping

    Returns:
        OracleResult with the final iterate
    """
    n = program.n_vars
    C = sp.vstack([program.a_eq, program.a_in], format="csr")
    rows = C.shape[0]
    lower = np.concatenate([program.b_eq, np.full(program.n_in, -np.inf)])
    upper = np.concatenate([program.b_eq, program.b_in])
    is_eq = np.concatenate([np.ones(program.n_eq, dtype=bool), np.zeros(program.n_in, dtype=bool)])

    q, c = program.q_diag, program.c
    dense_c = C.toarray()

    def rho_vector(rho: float) -> np.ndarray:
        return np.where(is_eq, EQUALITY_RHO_SCALE * rho, rho)

    def factor(rho_vec: np.ndarray):
        matrix = np.diag(q + SIGMA) + dense_c.T @ (rho_vec[:, None] * dense_c)
        return sla.cho_factor(matrix)

    rho = RHO_START
    rho_vec = rho_vector(rho)
    factors = factor(rho_vec)

    x = np.zeros(n)
    z = np.clip(np.zeros(rows), lower, upper)
    y = np.zeros(rows)
    history: List[float] = []
    converged = False
    k = 0

    for k in range(1, iters + 1):
        rhs = SIGMA * x - c + C.T @ (rho_vec * z - y)
        x_tilde = sla.cho_solve(factors, rhs)
        z_tilde = C @ x_tilde
        x = RELAXATION * x_tilde + (1.0 - RELAXATION) * x
        z_relaxed = RELAXATION * z_tilde + (1.0 - RELAXATION) * z
        z_next = np.clip(z_relaxed + y / rho_vec, lower, upper)
        y = y + rho_vec * (z_relaxed - z_next)
        z = z_next

        if k % CHECK_INTERVAL == 0 or k % ADAPT_INTERVAL == 0:
            cx = C @ x
            r_prim = float(np.max(np.abs(cx - z), initial=0.0))
            grad = q * x + c
            cty = C.T @ y
            r_dual = float(np.max(np.abs(grad + cty), initial=0.0))
            history.append(r_prim)
            if r_prim <= eps and r_dual <= eps:
                converged = True
                break
            if k % ADAPT_INTERVAL == 0 and r_dual > 0:
                prim_scale = max(np.max(np.abs(cx), initial=0.0), np.max(np.abs(z), initial=0.0), 1e-12)
                dual_scale = max(
                    np.max(np.abs(q * x), initial=0.0),
                    np.max(np.abs(cty), initial=0.0),
                    np.max(np.abs(c), initial=0.0),
                    1e-12,
                )
                ratio = np.sqrt((r_prim / prim_scale) / (r_dual / dual_scale))
                new_rho = float(np.clip(rho * ratio, RHO_MIN, RHO_MAX))
                if new_rho > 5.0 * rho or new_rho < 0.2 * rho:
                    rho = new_rho
                    rho_vec = rho_vector(rho)
                    factors = factor(rho_vec)

    objective = program.eval_objective(x)
    max_residual = program.residuals(x).max_violation
    logger.debug(
        f"[Oracle] {k} iterations, objective={objective:.8g}, max_residual={max_residual:.2e}, rho={rho:.2e}"
    )
    return OracleResult(
        x=x,
        objective=objective,
        max_residual=max_residual,
        history=history,
        iterations=k,
        converged=converged,
    )
