"""
Verification campaigns: randomized checks that pinning storage to zero at
single-connection generators leaves the optimum unchanged, the three-bus
star counterexample where pinning a multi-connection generator does cost
more, and the coincidence budget estimate.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from ..analytic.constructions import purify, transfer_storage
from ..config import RandomInstanceConfig, default_thread_count
from ..errors import GridstoreError, SolverError, VerificationError
from ..model.types import (
    UNBOUNDED,
    Bus,
    BusKind,
    CostPoly,
    DemandSeries,
    Line,
    Network,
    TopologyKind,
)
from ..program.builder import build
from ..program.spec import ProblemSpec
from ..solver.base import SolverConfig
from ..solver.ipm import solve
from .instances import RandomInstance, generate_instance

logger = logging.getLogger(__name__)

THEOREM_RTOL = 1e-6
CONSTRUCTION_FEAS_TOL = 1e-8
CONSTRUCTION_RTOL = 1e-9
COUNTEREXAMPLE_P = 877.0
COUNTEREXAMPLE_PI = 900.75
COUNTEREXAMPLE_ATOL = 1e-3


def objectives_agree(a: float, b: float, rtol: float = THEOREM_RTOL) -> bool:
    return abs(a - b) <= rtol * (1.0 + abs(a))


@dataclass
class TrialOutcome:
    """
    One randomized trial.

    Attributes:
        status: "passed", "failed" or "skipped"
        pinned: Single-connection generators pinned to zero storage
        transfer_ok: Whether the purify/transfer construction reproduced the
            restricted optimum (None when not attempted)
    """
    trial: int
    buses: int
    period: int
    pinned: Tuple[int, ...]
    status: str
    p_star: float = float("nan")
    pi_star: float = float("nan")
    reason: str = ""
    transfer_ok: Optional[bool] = None
    transfer_reason: str = ""

    @property
    def difference(self) -> float:
        return abs(self.p_star - self.pi_star)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "trial": self.trial,
            "buses": self.buses,
            "period": self.period,
            "pinned": "+".join(str(k) for k in self.pinned) or "none",
            "status": self.status,
            "p_star": self.p_star,
            "pi_star": self.pi_star,
            "difference": self.difference,
            "transfer_ok": self.transfer_ok,
            "reason": self.reason or self.transfer_reason,
        }


@dataclass
class CampaignReport:
    seed: int
    outcomes: List[TrialOutcome] = field(default_factory=list)

    def _count(self, status: str) -> int:
        return sum(1 for outcome in self.outcomes if outcome.status == status)

    @property
    def passed(self) -> int:
        return self._count("passed")

    @property
    def failed(self) -> int:
        return self._count("failed")

    @property
    def skipped(self) -> int:
        return self._count("skipped")

    @property
    def transfer_failures(self) -> int:
        return sum(1 for outcome in self.outcomes if outcome.transfer_ok is False)

    @property
    def ok(self) -> bool:
        return self.failed == 0 and self.transfer_failures == 0

    def failures(self) -> List[TrialOutcome]:
        return [outcome for outcome in self.outcomes if outcome.status == "failed"]

    def summary(self) -> str:
        return (
            f"seed={self.seed} trials={len(self.outcomes)} passed={self.passed} "
            f"failed={self.failed} skipped={self.skipped} transfer_failures={self.transfer_failures}"
        )

    def to_dataframe(self) -> pd.DataFrame:
        return pd.DataFrame([outcome.to_dict() for outcome in self.outcomes])


def _check_construction(instance: RandomInstance, sol, pinned: Tuple[int, ...], p_star: float) -> Tuple[bool, str]:
    """
    Purify and transfer bus by bus, then check the point against the restricted program.

    The point may be no less feasible than the solution it came from (plus
    CONSTRUCTION_FEAS_TOL) and keeps its objective to CONSTRUCTION_RTOL plus
    the duality gap of that solution.
    """
    net = instance.network
    tol = sol.max_residual() + CONSTRUCTION_FEAS_TOL
    current = sol
    try:
        for i in pinned:
            program = current.program
            current = purify(net, program.demand, program.spec, current, i)
            current = transfer_storage(net, current, i)
    except GridstoreError as e:
        return False, f"{e.error_code.value}: {e.message}"
    residual = current.program.residuals(current.x, tol=tol)
    if not residual.passed:
        return False, f"transferred point violates {', '.join(residual.flagged_tags())}"
    if not objectives_agree(p_star, current.objective, rtol=CONSTRUCTION_RTOL + abs(sol.gap)):
        return False, f"transferred objective {current.objective:.10g} differs from {p_star:.10g}"
    return True, ""


def run_trial(
    instance: RandomInstance,
    config: SolverConfig,
    check_transfer: bool = True,
) -> TrialOutcome:
    """Solve P and its restriction to the single-connection generators of one instance."""
    net, demand, spec = instance.network, instance.demand, instance.spec
    pinned = tuple(instance.single_connection)
    outcome = TrialOutcome(
        trial=instance.trial,
        buses=len(net.buses),
        period=demand.period,
        pinned=pinned,
        status="skipped",
    )

    full = solve(build(net, demand, spec), config)
    if not full.is_optimal():
        outcome.reason = f"P {full.status.value}"
        return outcome
    outcome.p_star = full.objective

    restricted = solve(build(net, demand, spec.with_pinned(pinned)), config)
    if not restricted.is_optimal():
        outcome.status = "failed"
        outcome.reason = f"restricted problem {restricted.status.value} while P is optimal"
        return outcome
    outcome.pi_star = restricted.objective

    if objectives_agree(outcome.p_star, outcome.pi_star):
        outcome.status = "passed"
    else:
        outcome.status = "failed"
        outcome.reason = f"objectives differ by {outcome.difference:.3e}"

    if check_transfer and pinned:
        outcome.transfer_ok, outcome.transfer_reason = _check_construction(instance, full, pinned, outcome.p_star)
        if not outcome.transfer_ok:
            logger.warning(f"[Campaign] trial {instance.trial}: construction check failed: {outcome.transfer_reason}")
    return outcome


def verify_theorem1(
    seed: int = 0,
    trials: int = 200,
    max_buses: Optional[int] = None,
    max_period: Optional[int] = None,
    solver_config: Optional[SolverConfig] = None,
    workers: Optional[int] = None,
    cfg: Optional[RandomInstanceConfig] = None,
    check_transfer: bool = True,
) -> CampaignReport:
    """
    Randomized check that zero storage at single-connection generators is optimal.

    Args:
        seed: Campaign seed (each trial draws from (seed, trial))
        trials: Number of random instances
        max_buses: Override of the generator's bus bound
        max_period: Override of the generator's period bound
        solver_config: Solver settings
        workers: Thread pool size
        cfg: Random instance parameters
        check_transfer: Also rebuild the restricted optimum by purify and transfer

    Returns:
        CampaignReport with one outcome per trial, in trial order
    """
    cfg = cfg or RandomInstanceConfig()
    overrides = {}
    if max_buses is not None:
        overrides["max_buses"] = max_buses
    if max_period is not None:
        overrides["max_period"] = max_period
    if overrides:
        cfg = RandomInstanceConfig(**{**cfg.model_dump(), **overrides})
    config = solver_config or SolverConfig()
    report = CampaignReport(seed=seed)
    if trials <= 0:
        return report

    pool_size = max(1, min(workers or default_thread_count(), trials))
    logger.info(f"[Campaign] {trials} trials, seed {seed}, {pool_size} threads")
    with ThreadPoolExecutor(max_workers=pool_size) as executor:
        futures = [
            executor.submit(run_trial, generate_instance(seed, trial, cfg), config, check_transfer)
            for trial in range(trials)
        ]
        report.outcomes = [future.result() for future in futures]

    for outcome in report.failures():
        logger.error(
            f"[Campaign] trial {outcome.trial} failed: {outcome.reason} "
            f"(p*={outcome.p_star:.10g}, pi*={outcome.pi_star:.10g})"
        )
    logger.info(f"[Campaign] {report.summary()}")
    return report


def counterexample_model(line_cap: float = 9.5, budget=5.0) -> Tuple[Network, DemandSeries, ProblemSpec]:
    """
    Three-bus star: generator 1 with cost g^2 feeding loads 2 and 3.

    Pinning storage to zero at the generator costs more here because the
    generator has two connections.
    """
    network = Network(
        name="counterexample",
        topology=TopologyKind.STAR,
        buses=[
            Bus(id=1, kind=BusKind.GENERATOR, gen_cap=UNBOUNDED, cost=CostPoly(c2=1.0)),
            Bus(id=2, kind=BusKind.LOAD),
            Bus(id=3, kind=BusKind.LOAD),
        ],
        lines=[
            Line(from_bus=1, to_bus=2, admittance=1.0, flow_cap=line_cap),
            Line(from_bus=1, to_bus=3, admittance=1.0, flow_cap=line_cap),
        ],
    )
    demand = DemandSeries(period=4, values={2: (9.0, 10.0, 0.0, 10.0), 3: (0.0, 10.0, 10.0, 10.0)})
    return network, demand, ProblemSpec(budget=budget)


@dataclass
class CounterexampleReport:
    line_cap: float
    budget: float
    p_star: float
    pi_star: float
    expected: Optional[Tuple[float, float]] = None

    @property
    def gap(self) -> float:
        return self.pi_star - self.p_star

    def to_dict(self) -> Dict[str, Any]:
        return {
            "line_cap": self.line_cap,
            "budget": self.budget,
            "p_star": self.p_star,
            "pi_star": self.pi_star,
            "gap": self.gap,
        }


def verify_counterexample(
    line_cap: float = 9.5,
    budget: float = 5.0,
    solver_config: Optional[SolverConfig] = None,
) -> CounterexampleReport:
    """
    Solve the three-bus star with and without storage at the generator.

    At the reference caps (9.5, budget 5) the optimal costs must be 877 and
    900.75; elsewhere only dominance of the restricted cost is checked.

    Raises:
        VerificationError: a variant is not optimal or a check fails
    """
    network, demand, spec = counterexample_model(line_cap, budget)
    config = solver_config or SolverConfig()
    full = solve(build(network, demand, spec), config)
    restricted = solve(build(network, demand, spec.with_pinned({1})), config)
    for name, sol in (("P", full), ("pinned", restricted)):
        if not sol.is_optimal():
            raise VerificationError(
                f"Counterexample {name} variant ended {sol.status.value}",
                detail=f"line_cap={line_cap}, budget={budget}",
            )

    reference = line_cap == 9.5 and budget == 5.0
    report = CounterexampleReport(
        line_cap=line_cap,
        budget=budget,
        p_star=full.objective,
        pi_star=restricted.objective,
        expected=(COUNTEREXAMPLE_P, COUNTEREXAMPLE_PI) if reference else None,
    )
    detail = f"p*={report.p_star:.6f}, pi*={report.pi_star:.6f}"
    if reference:
        if (abs(report.p_star - COUNTEREXAMPLE_P) > COUNTEREXAMPLE_ATOL
                or abs(report.pi_star - COUNTEREXAMPLE_PI) > COUNTEREXAMPLE_ATOL
                or report.gap <= 0):
            raise VerificationError(
                f"Counterexample objectives differ from {COUNTEREXAMPLE_P} and {COUNTEREXAMPLE_PI}",
                detail=detail,
            )
    elif report.gap < -THEOREM_RTOL * (1.0 + abs(report.p_star)):
        raise VerificationError("Pinned variant cheaper than P", detail=detail)
    logger.info(f"[Campaign] counterexample {detail}, gap={report.gap:.6f}")
    return report


def estimate_coincidence_budget(
    net: Network,
    demand: DemandSeries,
    spec: Optional[ProblemSpec] = None,
    solver_config: Optional[SolverConfig] = None,
) -> float:
    """
    Total peak storage level of the unbounded-budget optimum.

    Beyond this budget the star optimum with and without storage at the
    center coincide. The optimum may not be unique, so the figure belongs
    to the solver's optimum.

    Raises:
        SolverError: the unbounded-budget problem is not solved to optimality
    """
    spec = (spec or ProblemSpec()).with_budget(UNBOUNDED)
    sol = solve(build(net, demand, spec), solver_config or SolverConfig())
    if not sol.is_optimal():
        raise SolverError(f"Unbounded-budget problem ended {sol.status.value}")
    levels = np.maximum(sol.storage_levels(), 0.0)
    return float(np.sum(np.max(levels, axis=1)))
