"""
Tests for sweep plans, the sweep runner and the verification campaigns.
"""

import io
import math

import numpy as np
import pytest

from gridstore.errors import ErrorCode, UsageError
from gridstore.program import ProblemSpec
from gridstore.solver import SolverStatus
from gridstore.sweep import (
    CSV_COLUMNS,
    CampaignReport,
    TrialOutcome,
    estimate_coincidence_budget,
    generate_instance,
    make_plan,
    parse_grid,
    parse_variant,
    run_sweep,
    verify_counterexample,
    verify_theorem1,
)

STAR_OPTIMUM_UNBOUNDED = 4 * 14.75 ** 2


def test_parse_grid():
    assert parse_grid("0:8:5") == [0.0, 2.0, 4.0, 6.0, 8.0]
    assert parse_grid("1, 2.5") == [1.0, 2.5]
    assert parse_grid("") == []
    assert parse_grid("0:1:0") == []
    for bad in ("0:1", "a,b", "0:1:-2"):
        with pytest.raises(UsageError):
            parse_grid(bad)


def test_parse_variant():
    assert parse_variant("none") == frozenset()
    assert parse_variant("1+7") == frozenset({1, 7})
    assert parse_variant("2,1") == frozenset({1, 2})
    with pytest.raises(UsageError):
        parse_variant("one")


@pytest.mark.parametrize("grid", [(1.0, 1.0), (2.0, 1.0), (-1.0, 0.0), (float("nan"),)])
def test_plan_rejects_bad_grid(sgsl_model, grid):
    net, demand = sgsl_model
    with pytest.raises(UsageError):
        make_plan(net, demand, "budget", grid)


def test_plan_rejects_unresolved_targets(star_model, solver_config):
    net, demand, _ = star_model
    cases = [
        (make_plan(net, demand, "line", [1.0]), ErrorCode.USAGE_ERROR),
        (make_plan(net, demand, "line", [1.0], target="2-3"), ErrorCode.UNKNOWN_BUS),
        (make_plan(net, demand, "gen", [1.0], target=2), ErrorCode.NOT_A_GENERATOR),
        (make_plan(net, demand, "cap", [1.0]), ErrorCode.TOPOLOGY_UNSUPPORTED),
        (make_plan(net, demand, "budget", [1.0], variants=[{3}]), ErrorCode.NOT_A_GENERATOR),
    ]
    for plan, code in cases:
        with pytest.raises(UsageError) as exc:
            run_sweep(plan, solver_config)
        assert exc.value.error_code == code


def test_sgsl_budget_sweep(sgsl_model, solver_config):
    """Objective in h: infeasible below 0.5, then convex, nonincreasing and flat from 5."""
    net, demand = sgsl_model
    grid = np.linspace(0.0, 8.0, 40)
    result = run_sweep(make_plan(net, demand, "budget", grid), solver_config, workers=2)
    assert len(result.points) == 40
    first = result.first_feasible_index()
    assert grid[first - 1] < 0.5 < grid[first]
    assert all(p.status == SolverStatus.INFEASIBLE for p in result.points[:first])
    assert result.is_nonincreasing()
    assert result.convexity_violations() == 0
    plateau = result.plateau_index()
    assert grid[plateau - 1] < 5.0 <= grid[plateau]
    assert result.objectives()[-1] == pytest.approx(230.5, rel=1e-6)


def test_sgsl_line_sweep(sgsl_model, solver_config):
    net, demand = sgsl_model
    plan = make_plan(net, demand, "line", [9.0, 9.6, 10.0], target="1-2", base_spec=ProblemSpec(budget=5.0))
    result = run_sweep(plan, solver_config)
    assert [p.status for p in result.points] == [
        SolverStatus.INFEASIBLE, SolverStatus.OPTIMAL, SolverStatus.OPTIMAL,
    ]
    assert result.objectives()[1:] == pytest.approx([230.5, 230.5], rel=1e-6)


def test_counterexample_budget_sweep(star_model, solver_config):
    """Both variants become feasible at h_min = 2 and coincide once the budget is large."""
    net, demand, _ = star_model
    grid = [1.0, 2.1, 5.0, 100.0, 200.0]
    plan = make_plan(net, demand, "budget", grid, variants=[frozenset(), frozenset({1})])
    result = run_sweep(plan, solver_config, workers=2)
    assert result.variants == ["none", "1"]
    assert result.first_feasible_index("none") == result.first_feasible_index({1}) == 1
    at_reference = result.objectives("none")[2], result.objectives("1")[2]
    assert at_reference == pytest.approx((877.0, 900.75), abs=1e-3)
    assert result.coincidence_index("none", "1") == 3
    assert result.objectives("1")[-1] == pytest.approx(STAR_OPTIMUM_UNBOUNDED, rel=1e-6)


def test_sweep_order_does_not_depend_on_workers(star_model, solver_config):
    net, demand, _ = star_model
    plan = make_plan(net, demand, "budget", [2.5, 5.0], variants=[frozenset(), frozenset({1})])
    serial = run_sweep(plan, solver_config, workers=1)
    threaded = run_sweep(plan, solver_config, workers=4)
    keys = [(p.index, p.variant) for p in serial.points]
    assert keys == [(0, "none"), (0, "1"), (1, "none"), (1, "1")]
    assert keys == [(p.index, p.variant) for p in threaded.points]
    assert serial.objectives("1") == pytest.approx(threaded.objectives("1"), rel=1e-9)


def test_empty_grid_writes_header_only(sgsl_model, solver_config):
    net, demand = sgsl_model
    result = run_sweep(make_plan(net, demand, "budget", []), solver_config)
    assert result.points == []
    out = io.StringIO()
    result.write_csv(out)
    assert out.getvalue() == ",".join(CSV_COLUMNS) + "\n"


def test_csv_marks_infeasible_objective_as_nan(sgsl_model, solver_config):
    net, demand = sgsl_model
    result = run_sweep(make_plan(net, demand, "budget", [0.0, 5.0]), solver_config)
    out = io.StringIO()
    result.write_csv(out)
    rows = out.getvalue().splitlines()
    assert rows[1].split(",")[:4] == ["0", "none", "infeasible", "nan"]
    assert rows[2].split(",")[2] == "optimal"
    assert math.isclose(float(rows[2].split(",")[3]), 230.5, rel_tol=1e-6)


def test_verify_counterexample():
    report = verify_counterexample()
    assert report.p_star == pytest.approx(877.0, abs=1e-3)
    assert report.pi_star == pytest.approx(900.75, abs=1e-3)
    assert report.gap > 0


@pytest.mark.parametrize("budget", [0.0, 5.0])
def test_counterexample_gap_closes_with_loose_lines(budget):
    """With caps of 20 storage at the loads does everything storage at the center can."""
    report = verify_counterexample(line_cap=20.0, budget=budget)
    assert abs(report.gap) <= 1e-6 * (1.0 + abs(report.p_star))


def test_estimate_coincidence_budget(star_model, solver_config):
    net, demand, spec = star_model
    budget = estimate_coincidence_budget(net, demand, spec, solver_config)
    assert 0.0 < budget <= sum(demand.total()) + 1e-6


def test_generate_instance_is_deterministic():
    a = generate_instance(3, 5)
    b = generate_instance(3, 5)
    assert a.network == b.network
    assert a.demand == b.demand
    assert a.spec == b.spec
    assert 1 in a.single_connection
    assert generate_instance(3, 6).network != a.network


def test_verify_theorem1_small_campaign(solver_config):
    report = verify_theorem1(seed=11, trials=6, max_buses=5, max_period=4, solver_config=solver_config, workers=2)
    assert len(report.outcomes) == 6
    assert [o.trial for o in report.outcomes] == list(range(6))
    assert report.ok, [o.to_dict() for o in report.failures()]
    assert report.transfer_failures == 0
    assert report.passed + report.skipped == 6
    assert "trials=6" in report.summary()
    assert len(report.to_dataframe()) == 6


def test_campaign_fails_on_construction_failure():
    passed = TrialOutcome(trial=0, buses=3, period=2, pinned=(1,), status="passed", transfer_ok=True)
    broken = TrialOutcome(
        trial=1, buses=3, period=2, pinned=(1,), status="passed",
        transfer_ok=False, transfer_reason="transferred point violates balance",
    )
    assert CampaignReport(seed=0, outcomes=[passed]).ok
    report = CampaignReport(seed=0, outcomes=[passed, broken])
    assert report.failed == 0
    assert report.transfer_failures == 1
    assert not report.ok


@pytest.mark.slow
def test_verify_theorem1_full_campaign(solver_config):
    report = verify_theorem1(seed=0, trials=200, solver_config=solver_config)
    assert report.ok, report.summary()
    assert report.passed > 0
    assert report.transfer_failures == 0
