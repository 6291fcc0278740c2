"""
Tests for the SGSL and star closed forms, checked against the solver where
the two meet.
"""

import numpy as np
import pytest

from conftest import SGSL_DEMAND, make_sgsl
from gridstore.analytic import (
    INFEASIBLE,
    analyze_sgsl,
    analyze_star,
    f_min_sgsl,
    h_min_sgsl,
    h_min_star,
    h_sat,
    max_prefix_average,
    sgsl_kkt_multipliers,
    tau_sequence,
    unconstrained_dispatch,
)
from gridstore.errors import AnalyticError, ErrorCode, HypothesisNotMet
from gridstore.model import UNBOUNDED, load_model
from gridstore.model.types import Bus, BusKind, CostPoly, DemandSeries, Line, Network, StorageTech, TopologyKind
from gridstore.program import ProblemSpec, build
from gridstore.solver import SolverStatus, solve
from gridstore.sweep.campaigns import counterexample_model

QUADRATIC = CostPoly(c2=1.0)


@pytest.mark.parametrize(
    "h, expected",
    [(0.0, 10.0), (5.0, 9.5), (UNBOUNDED, 9.5), (100.0, 9.5)],
)
def test_f_min_sgsl(h, expected):
    assert f_min_sgsl(SGSL_DEMAND, h) == pytest.approx(expected)


def test_f_min_is_nonincreasing_in_budget():
    budgets = np.linspace(0.0, 6.0, 13)
    values = [f_min_sgsl(SGSL_DEMAND, h) for h in budgets]
    assert all(b <= a + 1e-12 for a, b in zip(values, values[1:]))


@pytest.mark.parametrize(
    "d, cap, expected",
    [
        (SGSL_DEMAND, 9.5, 0.5),
        ((0.0, 10.0, 10.0, 10.0), 9.5, 1.5),
        (SGSL_DEMAND, 10.0, 0.0),
        (SGSL_DEMAND, UNBOUNDED, 0.0),
    ],
)
def test_h_min_sgsl(d, cap, expected):
    assert h_min_sgsl(d, cap) == pytest.approx(expected)


def test_h_min_sgsl_below_prefix_average_is_infeasible():
    """No budget helps when the cap is under max_t sum(d)/t."""
    assert max_prefix_average(SGSL_DEMAND) == pytest.approx(9.5)
    assert h_min_sgsl(SGSL_DEMAND, 9.4) is INFEASIBLE
    assert str(INFEASIBLE) == "infeasible"


def test_h_sat_and_tau():
    tau = tau_sequence(SGSL_DEMAND)
    assert tau.breakpoints == (0, 2, 4)
    assert tau.averages == pytest.approx([9.5, 5.0])
    assert h_sat(SGSL_DEMAND) == pytest.approx(5.0)


def test_tau_tie_breaks_to_latest_time():
    """Equal prefix averages end the segment at the later time."""
    tau = tau_sequence((4.0, 4.0, 1.0))
    assert tau.breakpoints == (0, 2, 3)


def test_unconstrained_dispatch():
    g = unconstrained_dispatch(SGSL_DEMAND, QUADRATIC)
    assert g == pytest.approx([9.5, 9.5, 5.0, 5.0])
    assert float(np.sum(QUADRATIC.value(g))) == pytest.approx(230.5)
    with pytest.raises(AnalyticError):
        unconstrained_dispatch(SGSL_DEMAND, CostPoly(c1=1.0))


def test_negative_demand_is_rejected():
    with pytest.raises(AnalyticError):
        tau_sequence((1.0, -1.0))
    with pytest.raises(AnalyticError):
        f_min_sgsl(())


def test_sgsl_kkt_multipliers():
    multipliers = sgsl_kkt_multipliers(SGSL_DEMAND, QUADRATIC)
    assert multipliers.ell == pytest.approx([0.0, 9.0, 0.0, 0.0])
    assert multipliers.nu == pytest.approx(-10.0)
    assert np.all(multipliers.lam == 0.0)


def test_unconstrained_dispatch_matches_solver_on_random_profiles(solver_config):
    """Closed-form dispatch equals the solver optimum with no caps and no budget."""
    rng = np.random.default_rng(7)
    for _ in range(20):
        T = int(rng.integers(1, 13))
        d = tuple(float(v) for v in np.round(rng.uniform(0.0, 10.0, T), 3))
        net, demand = make_sgsl(demand=d, line_cap=UNBOUNDED)
        sol = solve(build(net, demand), solver_config)
        g = unconstrained_dispatch(d, QUADRATIC)
        expected = float(np.sum(QUADRATIC.value(g)))
        assert sol.objective == pytest.approx(expected, rel=1e-7, abs=1e-9)
        assert g.max() == pytest.approx(max_prefix_average(d), rel=0, abs=1e-12)


def test_analyze_sgsl(sgsl_model):
    net, demand = sgsl_model
    report = analyze_sgsl(net, demand, budget=0.0)
    assert report.f_min == pytest.approx(10.0)
    assert report.h_min == pytest.approx(0.5)
    assert report.h_sat == pytest.approx(5.0)
    assert report.cap == pytest.approx(9.5)
    assert not report.feasible
    assert report.unconstrained_cost == pytest.approx(230.5)
    rows = dict(report.rows())
    assert rows["feasible"] == "no"
    assert rows["tau"] == "0 2 4"
    assert analyze_sgsl(net, demand, budget=5.0).feasible


def test_analyze_sgsl_reports_infeasible_threshold():
    net, demand = make_sgsl(line_cap=9.0)
    report = analyze_sgsl(net, demand, budget=UNBOUNDED)
    assert report.h_min is INFEASIBLE
    assert dict(report.rows())["h_min"] == "infeasible"


def test_analyze_sgsl_rejects_lossy_storage():
    net, demand = make_sgsl(storage=StorageTech(eff_charge=0.9))
    with pytest.raises(AnalyticError) as exc:
        analyze_sgsl(net, demand)
    assert exc.value.error_code == ErrorCode.ASSUMPTION_VIOLATED


def test_analyze_sgsl_rejects_other_topologies(models_dir):
    net, demand = load_model(models_dir / "sample7.json")
    with pytest.raises(AnalyticError) as exc:
        analyze_sgsl(net, demand)
    assert exc.value.error_code == ErrorCode.TOPOLOGY_UNSUPPORTED


def test_h_min_star():
    demands = {2: SGSL_DEMAND, 3: (0.0, 10.0, 10.0, 10.0)}
    assert h_min_star(demands, {2: 9.5, 3: 9.5}) == pytest.approx(2.0)
    with pytest.raises(HypothesisNotMet) as exc:
        h_min_star(demands, {2: 9.0, 3: 9.5})
    assert exc.value.suggestions
    with pytest.raises(AnalyticError):
        h_min_star(demands, {2: 9.5})


def test_analyze_star(star_model):
    net, demand, spec = star_model
    report = analyze_star(net, demand, spec)
    assert report.h_min == pytest.approx(2.0)
    assert [b.h_min for b in report.branches] == pytest.approx([0.5, 1.5])
    assert report.feasible
    rows = dict(report.rows())
    assert rows["branch[3].h_min"] == pytest.approx(1.5)


def test_analyze_star_needs_unbounded_generator(star_model):
    net, demand, spec = star_model
    with pytest.raises(AnalyticError):
        analyze_star(net, demand, spec.with_gen_cap(1, 30.0))


def random_star(seed):
    rng = np.random.default_rng(seed)
    loads = list(range(2, 2 + int(rng.integers(2, 4))))
    demands = {k: tuple(rng.uniform(0.0, 10.0, 4)) for k in loads}
    caps = {}
    for k, d in demands.items():
        peak = max_prefix_average(d)
        caps[k] = peak + rng.uniform(0.0, 0.8) * (max(d) - peak)
    net = Network(
        name=f"star-{seed}",
        topology=TopologyKind.STAR,
        buses=[Bus(id=1, kind=BusKind.GENERATOR, gen_cap=UNBOUNDED, cost=QUADRATIC)]
        + [Bus(id=k, kind=BusKind.LOAD) for k in loads],
        lines=[Line(from_bus=1, to_bus=k, admittance=1.0, flow_cap=caps[k]) for k in loads],
    )
    return net, DemandSeries(period=4, values=demands), demands, caps


@pytest.mark.parametrize("seed", range(6))
def test_h_min_star_matches_solver_on_random_stars(solver_config, seed):
    net, demand, demands, caps = random_star(seed)
    h = h_min_star(demands, caps)
    assert h == pytest.approx(sum(float(h_min_sgsl(demands[k], caps[k])) for k in demands))
    assert analyze_star(net, demand, ProblemSpec(budget=h + 1.0)).h_min == pytest.approx(h)
    above = solve(build(net, demand, ProblemSpec(budget=1.02 * h + 1e-3)), solver_config)
    assert above.is_optimal(), above.message
    if h > 0.2:
        below = solve(build(net, demand, ProblemSpec(budget=0.98 * h)), solver_config)
        assert below.status == SolverStatus.INFEASIBLE


@pytest.mark.parametrize("budget, feasible", [(1.99, False), (2.01, True)])
def test_star_feasibility_flips_at_h_min(solver_config, budget, feasible):
    net, demand, spec = counterexample_model(budget=budget)
    sol = solve(build(net, demand, spec), solver_config)
    assert sol.is_optimal() == feasible


def test_star_variants_agree_at_h_min(solver_config):
    """At h = h_min storage sits on the loads, so pinning the center costs nothing."""
    net, demand, spec = counterexample_model(budget=2.0)
    full = solve(build(net, demand, spec), solver_config)
    pinned = solve(build(net, demand, spec.with_pinned({1})), solver_config)
    assert full.is_optimal() and pinned.is_optimal()
    assert pinned.objective == pytest.approx(full.objective, rel=1e-6)


def test_sgsl_solver_objective_constant_beyond_h_sat(sgsl_model, solver_config):
    net, demand = sgsl_model
    objectives = [
        solve(build(net, demand, ProblemSpec(budget=h)), solver_config).objective
        for h in (5.0, 6.0, 8.0)
    ]
    assert objectives == pytest.approx([230.5] * 3, rel=1e-6)
