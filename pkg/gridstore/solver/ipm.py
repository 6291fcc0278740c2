"""
Primal-dual interior-point method with Mehrotra predictor-corrector steps.

Solves
    minimize    1/2 x'Qx + c'x + const
    subject to  A x = b,  G x + s = h,  s >= 0

with Q diagonal. Each iteration factors the augmented KKT matrix

    [ Q + rho I   A'         G'             ]
    [ A           -rho I     0              ]     D = diag(s / z)
    [ G           0          -D - rho I     ]

once (dense LU below ``dense_threshold`` variables, sparse LU above) and reuses
it for the predictor and corrector solves, with iterative refinement
against the unregularized matrix. Keeping D in its own block avoids the
z/s blow-up of the reduced form near convergence. A zero pivot or a
non-finite solve retries the factorization with rho grown geometrically.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..program.program import ConvexProgram
from .base import Solution, SolverConfig, SolverStatus
from .certificates import phase_one

logger = logging.getLogger(__name__)

STEP_FRACTION = 0.99
REFINEMENT_STEPS = 5
REGULARIZATION_TRIES = 6
REGULARIZATION_GROWTH = 100.0
REDUCED_ACCURACY = 100.0
UNBOUNDED_OBJECTIVE = -1e12

_SOLVE_ERRORS = (np.linalg.LinAlgError, RuntimeError, ValueError)


@dataclass
class _Iterate:
    x: np.ndarray
    y: np.ndarray
    s: np.ndarray
    z: np.ndarray

    def copy(self) -> "_Iterate":
        return _Iterate(self.x.copy(), self.y.copy(), self.s.copy(), self.z.copy())

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(v)) for v in (self.x, self.y, self.s, self.z))


def _max_step(v: np.ndarray, dv: np.ndarray) -> float:
    mask = dv < 0
    if not np.any(mask):
        return 1.0
    return float(min(1.0, np.min(-v[mask] / dv[mask])))


def _inf_norm(v: np.ndarray) -> float:
    return float(np.max(np.abs(v))) if v.size else 0.0


class InteriorPointSolver:
    """Mehrotra predictor-corrector IPM for diagonal-Hessian QPs."""

    def __init__(self, program: ConvexProgram, config: SolverConfig):
        self.program = program
        self.config = config
        self.q = program.q_diag
        self.c = program.c
        self.A = program.a_eq.tocsr()
        self.b = program.b_eq
        self.G = program.a_in.tocsr()
        self.h = program.b_in
        self.n = program.n_vars
        self.p = program.n_eq
        self.m = program.n_in
        self.dense = self.n < config.dense_threshold
        self.b_norm = _inf_norm(self.b)
        self.h_norm = _inf_norm(self.h)
        self.c_norm = _inf_norm(self.c)

    # --- linear algebra -------------------------------------------------

    def _kkt_matrices(self, d: np.ndarray, rho: float) -> Tuple[sp.csc_matrix, sp.csc_matrix]:
        """Regularized and exact augmented KKT matrices for D = diag(d)."""
        n, p, m = self.n, self.p, self.m
        top = [sp.diags(self.q, format="csr")]
        if p:
            top.append(self.A.T)
        if m:
            top.append(self.G.T)
        grid = [top]
        if p:
            grid.append([self.A, sp.csr_matrix((p, p))] + ([sp.csr_matrix((p, m))] if m else []))
        if m:
            grid.append([self.G] + ([sp.csr_matrix((m, p))] if p else []) + [sp.diags(-d, format="csr")])
        exact = sp.bmat(grid, format="csc")
        shift = np.concatenate([np.full(n, rho), np.full(p + m, -rho)])
        return (exact + sp.diags(shift)).tocsc(), exact

    def _factor(self, d: np.ndarray, rho: float) -> Callable[[np.ndarray], np.ndarray]:
        """
        Factor the regularized matrix and return a refined solver.

        Raises:
            numpy.linalg.LinAlgError: zero pivot, or a solve that is not finite
            RuntimeError: sparse factorization found the matrix singular
        """
        regularized, exact = self._kkt_matrices(d, rho)
        if self.dense:
            matrix = regularized.toarray()
            getrf, = sla.get_lapack_funcs(("getrf",), (matrix,))
            lu, piv, info = getrf(matrix, overwrite_a=True)
            if info != 0 or not np.all(np.isfinite(lu)):
                raise np.linalg.LinAlgError(f"zero pivot in KKT factorization (info={info})")
            base = lambda rhs: sla.lu_solve((lu, piv), rhs, check_finite=False)
        else:
            base = spla.splu(regularized).solve

        def refined(rhs: np.ndarray) -> np.ndarray:
            sol = base(rhs)
            for _ in range(REFINEMENT_STEPS):
                residual = rhs - exact @ sol
                if _inf_norm(residual) <= 1e-14 * (1.0 + _inf_norm(rhs)):
                    break
                sol = sol + base(residual)
            if not np.all(np.isfinite(sol)):
                raise np.linalg.LinAlgError("non-finite KKT solve")
            return sol

        return refined

    def _direction(self, solve, it: _Iterate, r_d, r_p, r_g, r_sz):
        """Newton direction for the given right-hand sides."""
        rhs = np.concatenate([-r_d, -r_p, -r_g + r_sz / it.z])
        sol = solve(rhs)
        dx = sol[: self.n]
        dy = sol[self.n: self.n + self.p]
        dz = sol[self.n + self.p:]
        ds = -(r_sz + it.s * dz) / it.z
        return dx, dy, ds, dz

    def _predictor_corrector(self, solve, it: _Iterate, r_d, r_p, r_g, mu: float):
        r_sz = it.s * it.z
        dx, dy, ds, dz = self._direction(solve, it, r_d, r_p, r_g, r_sz)
        if not self.m:
            return dx, dy, ds, dz, 1.0
        alpha_aff = min(_max_step(it.s, ds), _max_step(it.z, dz))
        mu_aff = float(np.dot(it.s + alpha_aff * ds, it.z + alpha_aff * dz)) / self.m
        sigma = (mu_aff / mu) ** 3 if mu > 0 else 0.0

        r_sz = it.s * it.z + ds * dz - sigma * mu
        dx, dy, ds, dz = self._direction(solve, it, r_d, r_p, r_g, r_sz)
        alpha = min(1.0, STEP_FRACTION * min(_max_step(it.s, ds), _max_step(it.z, dz)))
        return dx, dy, ds, dz, alpha

    def _with_regularization(self, d: np.ndarray, work: Callable):
        """Run ``work(solve)``, growing the regularization until the KKT solves succeed."""
        rho = self.config.regularization
        error: Optional[Exception] = None
        for _ in range(REGULARIZATION_TRIES):
            try:
                return work(self._factor(d, rho))
            except _SOLVE_ERRORS as e:
                error = e
                logger.debug(f"[IPM] KKT solve failed with rho={rho:.1e}: {e}")
                rho *= REGULARIZATION_GROWTH
        raise np.linalg.LinAlgError(f"{error} (regularization up to {rho / REGULARIZATION_GROWTH:.1e})")

    def _newton_step(self, it: _Iterate, r_d, r_p, r_g, mu: float):
        return self._with_regularization(
            it.s / it.z, lambda solve: self._predictor_corrector(solve, it, r_d, r_p, r_g, mu)
        )

    # --- iteration ------------------------------------------------------

    def _initial_point(self) -> _Iterate:
        """Least-squares start: min 1/2 x'Qx + c'x + 1/2 |Gx - h|^2 subject to Ax = b."""
        rhs = np.concatenate([-self.c, self.b, self.h])
        sol = self._with_regularization(np.ones(self.m), lambda solve: solve(rhs))
        x = sol[: self.n]
        y = np.zeros(self.p)
        s = np.maximum(self.h - self.G @ x, 1.0) if self.m else np.zeros(0)
        z = np.ones(self.m)
        return _Iterate(x, y, s, z)

    def _objectives(self, it: _Iterate) -> Tuple[float, float]:
        quad = float(np.dot(self.q * it.x, it.x))
        pobj = 0.5 * quad + float(np.dot(self.c, it.x)) + self.program.const
        dobj = -0.5 * quad - float(np.dot(self.b, it.y)) - float(np.dot(self.h, it.z)) + self.program.const
        return pobj, dobj

    def _accurate(self, pres: float, dres: float, gap: float, factor: float = 1.0) -> bool:
        cfg = self.config
        return pres <= factor * cfg.tol_feas and dres <= factor * cfg.tol_feas and gap <= factor * cfg.tol_gap

    def run(self) -> Solution:
        cfg = self.config
        try:
            it = self._initial_point()
        except _SOLVE_ERRORS as e:
            logger.error(f"[IPM] Initial factorization failed: {e}")
            return self._solution(SolverStatus.ITER_LIMIT, _Iterate(
                np.zeros(self.n), np.zeros(self.p), np.ones(self.m), np.ones(self.m)), 0, [], str(e))

        history = []
        best: Optional[_Iterate] = None
        best_merit = np.inf
        best_metrics = (np.inf, np.inf, np.inf)
        status = SolverStatus.ITER_LIMIT
        message = "iteration limit reached"
        iteration = 0

        for iteration in range(1, cfg.max_iters + 1):
            r_d = self.q * it.x + self.c + self.A.T @ it.y + self.G.T @ it.z
            r_p = self.A @ it.x - self.b
            r_g = self.G @ it.x + it.s - self.h
            mu = float(np.dot(it.s, it.z)) / self.m if self.m else 0.0
            pobj, dobj = self._objectives(it)

            pres = max(_inf_norm(r_p) / (1.0 + self.b_norm), _inf_norm(r_g) / (1.0 + self.h_norm))
            dres = _inf_norm(r_d) / (1.0 + self.c_norm)
            gap = abs(pobj - dobj) / max(1.0, abs(pobj))
            history.append({"pobj": pobj, "dobj": dobj, "pres": pres, "dres": dres, "mu": mu})
            if cfg.verbose:
                logger.debug(
                    f"[IPM] it={iteration:3d} pobj={pobj:.10e} dobj={dobj:.10e} "
                    f"pres={pres:.2e} dres={dres:.2e} mu={mu:.2e}"
                )

            merit = max(pres, dres, gap)
            if merit < best_merit:
                best_merit, best, best_metrics = merit, it.copy(), (pres, dres, gap)

            if self._accurate(pres, dres, gap):
                status, message = SolverStatus.OPTIMAL, "converged"
                best = it
                break
            if pobj < UNBOUNDED_OBJECTIVE and pres <= cfg.tol_feas:
                status, message = SolverStatus.UNBOUNDED, "objective decreasing without bound"
                best = it
                break

            try:
                dx, dy, ds, dz, alpha = self._newton_step(it, r_d, r_p, r_g, mu)
            except _SOLVE_ERRORS as e:
                message = f"numerical breakdown: {e}"
                logger.warning(f"[IPM] {message} at iteration {iteration}")
                break

            candidate = _Iterate(
                it.x + alpha * dx, it.y + alpha * dy, it.s + alpha * ds, it.z + alpha * dz
            )
            if not candidate.is_finite():
                message = "numerical breakdown: non-finite iterate"
                logger.warning(f"[IPM] {message} at iteration {iteration}")
                break
            it = candidate

        final = best if best is not None else it
        if status == SolverStatus.ITER_LIMIT and self._accurate(*best_metrics, factor=REDUCED_ACCURACY):
            status = SolverStatus.OPTIMAL
            message = f"converged to reduced accuracy ({message})"
            logger.info(f"[IPM] Accepting best iterate: pres={best_metrics[0]:.2e} "
                        f"dres={best_metrics[1]:.2e} gap={best_metrics[2]:.2e}")
        elif status != SolverStatus.OPTIMAL:
            logger.warning(f"[IPM] Stopped without convergence ({message}); returning best iterate")
        return self._solution(status, final, iteration, history, message)

    def _solution(self, status, it: _Iterate, iterations, history, message) -> Solution:
        pobj, dobj = self._objectives(it)
        return Solution(
            status=status,
            x=it.x,
            y=it.y,
            z=it.z,
            objective=self.program.eval_objective(it.x),
            dual_objective=dobj,
            gap=abs(pobj - dobj) / max(1.0, abs(pobj)),
            iterations=iterations,
            program=self.program,
            history=history,
            message=message,
        )


def _warn_if_implied_budget_active(program: ConvexProgram, solution: Solution) -> None:
    try:
        _, row = program.row("implied:budget")
    except KeyError:
        return
    bound = program.b_in[row]
    slack = bound - float((program.a_in[row] @ solution.x)[0])
    if slack <= 1e-6 * (1.0 + abs(bound)):
        logger.warning(f"[IPM] Implied budget bound {bound:.6g} is active; the unbounded-budget optimum may be cut off")


def solve(program: ConvexProgram, config: Optional[SolverConfig] = None) -> Solution:
    """
    Solve a convex QP.

    An elastic phase-1 problem first decides feasibility; infeasible
    programs return INFEASIBLE with a Farkas certificate attached and
    feasible ones go to the interior-point method.

    Args:
        program: Program to solve
        config: Solver settings

    Returns:
        Solution with status, primal point, multipliers and objective
    """
    config = config or SolverConfig()
    phase = phase_one(program, config)
    if phase is not None and not phase.feasible:
        logger.info(f"[IPM] Program infeasible (phase-1 objective {phase.objective:.3e})")
        return Solution(
            status=SolverStatus.INFEASIBLE,
            x=phase.x,
            y=None,
            z=None,
            objective=float("nan"),
            dual_objective=float("nan"),
            gap=float("nan"),
            iterations=0,
            program=program,
            certificate=phase.certificate,
            message=f"phase-1 violation {phase.objective:.6g}",
        )
    solution = InteriorPointSolver(program, config).run()
    _warn_if_implied_budget_active(program, solution)
    logger.debug(
        f"[IPM] {solution.status.value} objective={solution.objective:.10g} "
        f"iterations={solution.iterations}"
    )
    return solution
