"""
Tests for the interior-point solver, certificates and the ADMM oracle.
"""

import numpy as np
import pytest

from conftest import make_sgsl
from gridstore.analytic import sgsl_kkt_multipliers
from gridstore.config import RandomInstanceConfig
from gridstore.errors import SolverError
from gridstore.model import UNBOUNDED, CostPoly, StorageTech, load_model
from gridstore.program import ConvexProgram, ProblemSpec, build
from gridstore.solver import (
    SolverStatus,
    balance_prices,
    kkt_report,
    oracle_solve,
    solve,
    storage_duals,
)
from gridstore.sweep import generate_instance

KKT_TOL = 1e-6


def assert_optimal(sol):
    assert sol.status == SolverStatus.OPTIMAL, sol.message
    report = kkt_report(sol.program, sol)
    assert report.max_residual() <= KKT_TOL * (1.0 + abs(sol.objective)), report.to_dict()
    assert sol.dual_objective <= sol.objective + 1e-6 * (1.0 + abs(sol.objective))
    return report


def test_small_qp():
    """min (x - 1)^2 subject to x <= 0.5."""
    program = ConvexProgram.from_matrices(q_diag=[2.0], c=[-2.0], a_in=[[1.0]], b_in=[0.5], const=1.0)
    sol = solve(program)
    assert_optimal(sol)
    assert sol.x[0] == pytest.approx(0.5, abs=1e-7)
    assert sol.objective == pytest.approx(0.25, abs=1e-7)
    assert sol.z[0] == pytest.approx(1.0, abs=1e-6)


def test_equality_constrained_qp():
    """min x1^2 + x2^2 subject to x1 + x2 = 2."""
    program = ConvexProgram.from_matrices(q_diag=[2.0, 2.0], c=[0.0, 0.0], a_eq=[[1.0, 1.0]], b_eq=[2.0])
    sol = solve(program)
    assert_optimal(sol)
    assert sol.x == pytest.approx([1.0, 1.0], abs=1e-7)


def test_counterexample_objectives(star_model, solver_config):
    net, demand, spec = star_model
    full = solve(build(net, demand, spec), solver_config)
    pinned = solve(build(net, demand, spec.with_pinned({1})), solver_config)
    assert_optimal(full)
    assert_optimal(pinned)
    assert full.objective == pytest.approx(877.0, abs=1e-3)
    assert pinned.objective == pytest.approx(900.75, abs=1e-3)
    assert pinned.capacities()[1] == pytest.approx(0.0, abs=1e-7)


def test_net_storage_form_matches_split_form(star_model, solver_config):
    net, demand, spec = star_model
    split = solve(build(net, demand, spec), solver_config)
    net_form = solve(build(net, demand, spec.model_copy(update={"net_storage": True})), solver_config)
    assert_optimal(net_form)
    assert net_form.objective == pytest.approx(split.objective, rel=1e-6)
    gamma = net_form.profile("gamma", 2)
    delta = net_form.profile("delta", 2)
    assert np.all(np.minimum(gamma, delta) == 0.0)


def test_sgsl_optimum(sgsl_model, solver_config):
    net, demand = sgsl_model
    sol = solve(build(net, demand, ProblemSpec(budget=5.0)), solver_config)
    assert_optimal(sol)
    assert sol.objective == pytest.approx(230.5, rel=1e-6)
    assert sol.profile("g", 1) == pytest.approx([9.5, 9.5, 5.0, 5.0], abs=1e-5)
    levels = sol.storage_levels()
    assert levels.shape == (2, 4)
    assert np.all(levels >= -1e-7)


@pytest.mark.parametrize("budget, feasible", [(0.0, False), (0.45, False), (0.55, True), (5.0, True)])
def test_sgsl_feasibility_in_budget(sgsl_model, solver_config, budget, feasible):
    """Feasible iff h >= h_min = 0.5 at cap 9.5."""
    net, demand = sgsl_model
    sol = solve(build(net, demand, ProblemSpec(budget=budget)), solver_config)
    assert sol.is_optimal() == feasible
    if not feasible:
        assert sol.status == SolverStatus.INFEASIBLE


@pytest.mark.parametrize("budget, f_min", [(0.0, 10.0), (5.0, 9.5)])
def test_sgsl_feasibility_flips_at_f_min(sgsl_model, solver_config, budget, f_min):
    net, demand = sgsl_model
    base = ProblemSpec(budget=budget)
    below = solve(build(net, demand, base.with_all_caps(net, f_min - 0.01)), solver_config)
    assert below.status == SolverStatus.INFEASIBLE
    objectives = []
    for scale in (1.0, 1.5, 10.0):
        sol = solve(build(net, demand, base.with_all_caps(net, scale * f_min)), solver_config)
        assert sol.is_optimal()
        objectives.append(sol.objective)
    assert objectives == pytest.approx([objectives[0]] * 3, rel=1e-6)


def test_infeasible_program_carries_certificate(sgsl_model, solver_config):
    net, demand = sgsl_model
    program = build(net, demand, ProblemSpec(budget=0.0))
    sol = solve(program, solver_config)
    assert sol.status == SolverStatus.INFEASIBLE
    assert sol.certificate is not None
    assert sol.certificate.phase1_objective > solver_config.infeasibility_threshold
    assert sol.certificate.is_valid(program)


def test_kkt_report_rejects_infeasible_solution(sgsl_model, solver_config):
    net, demand = sgsl_model
    program = build(net, demand, ProblemSpec(budget=0.0))
    sol = solve(program, solver_config)
    with pytest.raises(SolverError):
        kkt_report(program, sol)


def test_duals_by_tag_and_prices(star_model, solver_config):
    net, demand, spec = star_model
    program = build(net, demand, spec)
    sol = solve(program, solver_config)
    report = assert_optimal(sol)
    assert set(report.duals_by_tag) == set(program.tags())
    prices = balance_prices(program, sol)
    assert prices.shape == (3, 4)
    lower = storage_duals(program, sol, 2)
    upper = storage_duals(program, sol, 2, side="upper")
    assert lower.shape == upper.shape == (4,)
    assert np.all(lower >= -1e-9)


def test_sample7_theorem_holds(models_dir, solver_config):
    """Pinning the single-connection generators 1 and 2 costs nothing."""
    net, demand = load_model(models_dir / "sample7.json")
    spec = ProblemSpec(budget=4.0)
    full = solve(build(net, demand, spec), solver_config)
    pinned = solve(build(net, demand, spec.with_pinned({1, 2})), solver_config)
    assert_optimal(full)
    assert_optimal(pinned)
    assert pinned.objective == pytest.approx(full.objective, rel=1e-6, abs=1e-6)


def test_oracle_agrees_with_ipm(star_model, solver_config):
    net, demand, spec = star_model
    program = build(net, demand, spec)
    sol = solve(program, solver_config)
    oracle = oracle_solve(program, iters=20000)
    assert abs(oracle.objective - sol.objective) <= 1e-3 * (1.0 + abs(sol.objective))
    assert oracle.max_residual <= 1e-2


def test_unbounded_budget_matches_large_budget(sgsl_model, solver_config):
    net, demand = sgsl_model
    unbounded = solve(build(net, demand), solver_config)
    large = solve(build(net, demand, ProblemSpec(budget=20.0)), solver_config)
    assert_optimal(unbounded)
    assert unbounded.objective == pytest.approx(large.objective, rel=1e-6)


@pytest.mark.parametrize("budget", [5.0, 6.0, 20.0, 200.0, None])
def test_sgsl_optimum_is_stable_across_budgets(sgsl_model, solver_config, budget):
    """Above h_sat = 5 the budget no longer matters."""
    net, demand = sgsl_model
    spec = ProblemSpec() if budget is None else ProblemSpec(budget=budget)
    sol = solve(build(net, demand, spec), solver_config)
    assert_optimal(sol)
    assert sol.iterations < solver_config.max_iters
    assert sol.objective == pytest.approx(230.5, rel=1e-6)
    assert np.all(np.isfinite(sol.x))


def test_redundant_equality_rows():
    """The same equality twice makes the unregularized KKT matrix singular."""
    program = ConvexProgram.from_matrices(
        q_diag=[2.0, 2.0], c=[0.0, 0.0], a_eq=[[1.0, 1.0], [1.0, 1.0]], b_eq=[2.0, 2.0],
        a_in=[[-1.0, 0.0]], b_in=[0.0],
    )
    sol = solve(program)
    assert sol.status == SolverStatus.OPTIMAL, sol.message
    assert sol.x == pytest.approx([1.0, 1.0], abs=1e-6)
    assert sol.objective == pytest.approx(2.0, abs=1e-6)


def test_unbounded_budget_with_slow_ramp(solver_config):
    """A 5% ramp needs capacity 20 times the 5 MW the load bus must store."""
    net, demand = make_sgsl(
        demand=(0.0, 10.0), line_cap=5.0,
        storage=StorageTech(ramp_charge=0.05, ramp_discharge=0.05),
    )
    sol = solve(build(net, demand), solver_config)
    assert_optimal(sol)
    assert sol.objective == pytest.approx(50.0, rel=1e-6)
    assert sol.profile("g", 1) == pytest.approx([5.0, 5.0], abs=1e-5)
    assert sol.capacities()[2] >= 100.0 - 1e-5


@pytest.mark.parametrize("model", ["sgsl", "star"])
def test_weak_duality_along_iterates(sgsl_model, star_model, solver_config, model):
    if model == "sgsl":
        net, demand = sgsl_model
        spec = ProblemSpec(budget=5.0)
    else:
        net, demand, spec = star_model
    sol = solve(build(net, demand, spec), solver_config)
    assert_optimal(sol)
    assert all(entry["mu"] >= 0.0 for entry in sol.history)
    nearly_feasible = [e for e in sol.history if e["pres"] <= 1e-6 and e["dres"] <= 1e-6]
    assert nearly_feasible
    for entry in nearly_feasible:
        assert entry["dobj"] <= entry["pobj"] + 1e-4 * (1.0 + abs(entry["pobj"]))


def test_zero_demand(solver_config):
    net, demand = make_sgsl(demand=(0.0, 0.0, 0.0))
    for spec in (ProblemSpec(), ProblemSpec(budget=0.0)):
        program = build(net, demand, spec)
        sol = solve(program, solver_config)
        assert_optimal(sol)
        assert sol.objective == pytest.approx(0.0, abs=1e-6)
        assert sol.profile("g", 1) == pytest.approx([0.0, 0.0, 0.0], abs=1e-6)
        assert sol.dual_objective == pytest.approx(0.0, abs=1e-5)
        assert balance_prices(program, sol).shape == (2, 3)
        assert np.all(storage_duals(program, sol, 2) >= -1e-9)


def test_oracle_agrees_with_ipm_on_random_instances(solver_config):
    cfg = RandomInstanceConfig(max_buses=4, max_period=3, budget_scale=(1.0, 2.0))
    checked = 0
    for trial in range(6):
        instance = generate_instance(5, trial, cfg)
        program = build(instance.network, instance.demand, instance.spec)
        sol = solve(program, solver_config)
        if not sol.is_optimal():
            continue
        assert_optimal(sol)
        oracle = oracle_solve(program, iters=20000)
        assert abs(oracle.objective - sol.objective) <= 1e-3 * (1.0 + abs(sol.objective)), trial
        assert oracle.max_residual <= 1e-2
        checked += 1
    assert checked > 0


def test_storage_duals_match_closed_form_multipliers(solver_config):
    """With storage only at the load bus and no line limit, level duals are the closed-form ell."""
    demand_values = (9.0, 10.0, 0.0, 10.0)
    net, demand = make_sgsl(demand=demand_values, line_cap=UNBOUNDED)
    program = build(net, demand, ProblemSpec().with_pinned({1}))
    sol = solve(program, solver_config)
    assert_optimal(sol)
    expected = sgsl_kkt_multipliers(demand_values, CostPoly(c2=1.0))
    assert expected.ell == pytest.approx([0.0, 9.0, 0.0, 0.0])
    lower = storage_duals(program, sol, 2)
    # the last level row and the periodicity row share one multiplier
    assert lower[:-1] == pytest.approx(expected.ell[:-1], abs=1e-5)
    assert storage_duals(program, sol, 2, side="upper") == pytest.approx(expected.lam, abs=1e-5)
    prices = np.abs(balance_prices(program, sol)[1])
    assert prices == pytest.approx([19.0, 19.0, 10.0, 10.0], abs=1e-5)
    assert abs(expected.nu) == pytest.approx(10.0)
