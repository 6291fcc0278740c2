"""
Shared fixtures: the worked models and a solver configuration.
"""

import os
from pathlib import Path

import pytest

from gridstore.config import get_settings
from gridstore.model.types import UNBOUNDED, Bus, BusKind, CostPoly, DemandSeries, Line, Network, StorageTech, TopologyKind
from gridstore.solver.base import SolverConfig
from gridstore.sweep.campaigns import counterexample_model

MODELS_DIR = Path(__file__).resolve().parent.parent / "models"

SGSL_DEMAND = (9.0, 10.0, 0.0, 10.0)


def make_sgsl(demand=SGSL_DEMAND, line_cap=9.5, gen_cap=UNBOUNDED, c2=1.0, c1=0.0, storage=None):
    """Single generator (bus 1) feeding a single load (bus 2)."""
    net = Network(
        name="sgsl",
        topology=TopologyKind.SGSL,
        buses=[
            Bus(id=1, kind=BusKind.GENERATOR, gen_cap=gen_cap, cost=CostPoly(c2=c2, c1=c1)),
            Bus(id=2, kind=BusKind.LOAD),
        ],
        lines=[Line(from_bus=1, to_bus=2, admittance=1.0, flow_cap=line_cap)],
        storage=storage or StorageTech(),
    )
    return net, DemandSeries(period=len(demand), values={2: tuple(demand)})


@pytest.fixture
def solver_config():
    return SolverConfig()


@pytest.fixture
def sgsl_model():
    return make_sgsl()


@pytest.fixture
def star_model():
    return counterexample_model()


@pytest.fixture
def models_dir():
    return MODELS_DIR


@pytest.fixture(autouse=True)
def isolated_settings(monkeypatch):
    """Keep GRIDSTORE_* variables of the host out of the cached settings."""
    for key in list(os.environ):
        if key.upper().startswith("GRIDSTORE_"):
            monkeypatch.delenv(key, raising=False)
    monkeypatch.setenv("GRIDSTORE_THREADS", "2")
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()
