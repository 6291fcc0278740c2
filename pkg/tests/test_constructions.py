"""
Tests for purification and storage transfer at single-connection
generator buses.
"""

import numpy as np
import pytest

from conftest import make_sgsl
from gridstore.analytic import exchange_gain, purify, transfer_storage
from gridstore.errors import AnalyticError, ErrorCode, PurificationError, TransferError
from gridstore.model import load_model
from gridstore.model.types import CostPoly, cap_value
from gridstore.program import ProblemSpec, build
from gridstore.solver import solve

FEASIBILITY_TOL = 1e-6


@pytest.fixture
def sample7_optimum(models_dir, solver_config):
    net, demand = load_model(models_dir / "sample7.json")
    spec = ProblemSpec(budget=4.0)
    sol = solve(build(net, demand, spec), solver_config)
    assert sol.is_optimal()
    return net, demand, spec, sol


def assert_purified(net, spec, sol, bus_id):
    g = sol.profile("g", bus_id)
    gamma = sol.profile("gamma", bus_id)
    delta = sol.profile("delta", bus_id)
    assert np.all(g * gamma * delta <= 1e-9)
    line = net.line_between(bus_id, net.neighbors(bus_id)[0])
    assert np.all(g <= cap_value(spec.line_cap_for(line)) + 1e-6)


def test_exchange_gain_is_nonnegative_for_convex_cost():
    cost = CostPoly(c2=1.0)
    assert exchange_gain(cost, 1.0, 3.0, 1.0) == pytest.approx(2.0)
    assert exchange_gain(cost, 1.0, 3.0, 0.0) == 0.0
    with pytest.raises(AnalyticError):
        exchange_gain(cost, 1.0, 3.0, 2.5)
    with pytest.raises(AnalyticError):
        exchange_gain(cost, 1.0, 3.0, -0.1)


@pytest.mark.parametrize("seed", range(5))
def test_exchange_gain_is_nonnegative_on_random_costs(seed):
    rng = np.random.default_rng(seed)
    for _ in range(200):
        cost = CostPoly(c2=rng.uniform(0.0, 3.0), c1=rng.uniform(0.0, 5.0), c0=rng.uniform(0.0, 2.0))
        x1, x2 = np.sort(rng.uniform(0.0, 20.0, 2))
        eta = rng.uniform(0.0, x2 - x1)
        assert exchange_gain(cost, x1, x2, eta) >= -1e-12 * (1.0 + cost.value(x2))
        assert exchange_gain(cost, x1, x2, x2 - x1) == pytest.approx(0.0, abs=1e-9)


def test_purify_keeps_objective_on_sample7(sample7_optimum):
    net, demand, spec, sol = sample7_optimum
    for bus_id in (1, 2):
        purified = purify(net, demand, spec, sol, bus_id)
        assert_purified(net, spec, purified, bus_id)
        assert purified.objective <= sol.objective + 1e-9 * (1.0 + abs(sol.objective))
        assert purified.program.residuals(purified.x, tol=FEASIBILITY_TOL).passed


def test_transfer_after_purify_on_sample7(sample7_optimum):
    """Moving the storage of buses 1 and 2 keeps the point feasible and the cost unchanged."""
    net, demand, spec, sol = sample7_optimum
    current = sol
    for bus_id in (1, 2):
        current = purify(net, demand, current.program.spec, current, bus_id)
        current = transfer_storage(net, current, bus_id)
        assert current.capacities()[bus_id] == 0.0
        assert bus_id in current.program.spec.pinned_zero
        report = current.program.residuals(current.x, tol=FEASIBILITY_TOL)
        assert report.passed, report.violations()
        assert current.y is None and current.z is None
    assert current.objective == pytest.approx(sol.objective, rel=1e-9, abs=1e-9)
    assert current.program.spec.pinned_zero == frozenset({1, 2})


def test_transfer_preserves_generation_profiles(sample7_optimum):
    net, demand, spec, sol = sample7_optimum
    purified = purify(net, demand, spec, sol, 1)
    moved = transfer_storage(net, purified, 1)
    for bus_id in net.generator_ids:
        assert moved.profile("g", bus_id) == pytest.approx(purified.profile("g", bus_id), abs=0.0)
    total = sum(moved.capacities().values())
    assert total == pytest.approx(sum(purified.capacities().values()))


def test_sgsl_purify_and_transfer(sgsl_model, solver_config):
    net, demand = sgsl_model
    spec = ProblemSpec(budget=5.0)
    sol = solve(build(net, demand, spec), solver_config)
    purified = purify(net, demand, spec, sol, 1)
    assert_purified(net, spec, purified, 1)
    moved = transfer_storage(net, purified, 1)
    assert moved.objective == pytest.approx(230.5, rel=1e-6)
    assert moved.capacities()[2] == pytest.approx(sum(sol.capacities().values()))


def test_transfer_rejects_generation_above_cap(sgsl_model, solver_config):
    """A point with g above the line cap needs purification first."""
    net, demand = sgsl_model
    sol = solve(build(net, demand, ProblemSpec(budget=5.0)), solver_config)
    x = sol.x.copy()
    v = sol.program.variables
    x[v.index("g", 1, 2)] = 10.0
    with pytest.raises(TransferError) as exc:
        transfer_storage(net, sol.with_point(x), 1)
    assert exc.value.suggestions


def test_purify_rejects_multi_neighbor_generator(sample7_optimum):
    net, demand, spec, sol = sample7_optimum
    with pytest.raises(PurificationError) as exc:
        purify(net, demand, spec, sol, 7)
    assert exc.value.error_code == ErrorCode.NOT_SINGLE_CONNECTION


def test_purify_rejects_load_bus(sample7_optimum):
    net, demand, spec, sol = sample7_optimum
    with pytest.raises(PurificationError) as exc:
        purify(net, demand, spec, sol, 3)
    assert exc.value.error_code == ErrorCode.NOT_A_GENERATOR
    with pytest.raises(TransferError) as exc:
        transfer_storage(net, sol, 3)
    assert exc.value.error_code == ErrorCode.NOT_A_GENERATOR


def test_purify_rejects_non_optimal_solution(sgsl_model, solver_config):
    net, demand = sgsl_model
    spec = ProblemSpec(budget=0.0)
    sol = solve(build(net, demand, spec), solver_config)
    assert not sol.is_optimal()
    with pytest.raises(PurificationError) as exc:
        purify(net, demand, spec, sol, 1)
    assert exc.value.error_code == ErrorCode.NOT_OPTIMAL


def test_constructions_need_split_storage(star_model, solver_config):
    net, demand, spec = star_model
    net_spec = spec.model_copy(update={"net_storage": True})
    sol = solve(build(net, demand, net_spec), solver_config)
    with pytest.raises(PurificationError) as exc:
        purify(net, demand, net_spec, sol, 1)
    assert exc.value.error_code == ErrorCode.ASSUMPTION_VIOLATED
    with pytest.raises(TransferError) as exc:
        transfer_storage(net, sol, 1)
    assert exc.value.error_code == ErrorCode.ASSUMPTION_VIOLATED


def local_storage_point(seed):
    """
    Optimal point of a linear-cost SGSL model where the generator charges
    its own storage above the line cap and discharges it later.
    """
    rng = np.random.default_rng(seed)
    d = np.concatenate([rng.uniform(1.0, 10.0, 3), rng.uniform(5.0, 10.0, 3)])
    cap = float(d.max())
    d[0] = cap
    net, demand = make_sgsl(demand=tuple(d), line_cap=cap, c2=0.0, c1=1.0)
    spec = ProblemSpec()
    sol = solve(build(net, demand, spec))
    assert sol.is_optimal()

    gamma = np.zeros(6)
    delta = np.zeros(6)
    gamma[:3] = rng.uniform(0.5, 1.5, 3)
    delta[3:] = gamma.sum() * rng.dirichlet(np.ones(3))
    g = d + gamma - delta
    v = sol.program.variables
    x = np.zeros(sol.program.n_vars)
    for t in range(1, 7):
        x[v.index("g", 1, t)] = g[t - 1]
        x[v.index("gamma", 1, t)] = gamma[t - 1]
        x[v.index("delta", 1, t)] = delta[t - 1]
        x[v.index("p", (1, 2), t)] = d[t - 1]
        x[v.index("theta", 2, t)] = -d[t - 1]
    x[v.index("b", 1)] = float(np.max(np.cumsum(gamma - delta)))
    point = sol.with_point(x)
    assert point.program.residuals(point.x, tol=1e-9).passed
    assert np.max(g) > cap
    return net, demand, spec, point, cap


@pytest.mark.parametrize("seed", range(5))
def test_purify_shifts_generation_below_line_cap(seed):
    net, demand, spec, point, cap = local_storage_point(seed)
    purified = purify(net, demand, spec, point, 1)
    assert_purified(net, spec, purified, 1)
    assert float(np.max(purified.profile("g", 1))) <= cap + 1e-9
    assert purified.profile("g", 1).sum() == pytest.approx(point.profile("g", 1).sum(), abs=1e-9)
    assert purified.objective == pytest.approx(point.objective, rel=1e-9, abs=1e-9)
    report = purified.program.residuals(purified.x, tol=1e-9)
    assert report.passed, report.violations()

    moved = transfer_storage(net, purified, 1)
    assert moved.capacities()[1] == 0.0
    assert moved.objective == pytest.approx(point.objective, rel=1e-9, abs=1e-9)
    report = moved.program.residuals(moved.x, tol=1e-9)
    assert report.passed, report.violations()
