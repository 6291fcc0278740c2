"""
Seeded random instances with at least one single-connection generator.

Bus 1 is always a generator hanging off the rest of the network by one
line and bus 2 is always a load. Buses 2..n form a random tree with extra
mesh edges; the remaining buses are loads or, with some probability,
generators.
"""

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from ..analytic.sgsl import max_prefix_average
from ..config import RandomInstanceConfig
from ..model.topology import classify_buses
from ..model.types import (
    UNBOUNDED,
    Bus,
    BusKind,
    CostPoly,
    DemandSeries,
    Line,
    Network,
    StorageTech,
)
from ..program.spec import ProblemSpec


@dataclass(frozen=True)
class RandomInstance:
    seed: int
    trial: int
    network: Network
    demand: DemandSeries
    spec: ProblemSpec

    @property
    def single_connection(self) -> List[int]:
        return sorted(classify_buses(self.network).single_connection)


def _uniform(rng: np.random.Generator, bounds: Tuple[float, float]) -> float:
    lo, hi = bounds
    return float(rng.uniform(lo, hi)) if hi > lo else float(lo)


def generate_instance(seed: int, trial: int, cfg: Optional[RandomInstanceConfig] = None) -> RandomInstance:
    """
    Draw one instance; the same (seed, trial) always yields the same model.

    Args:
        seed: Campaign seed
        trial: Trial number within the campaign
        cfg: Generator parameters

    Returns:
        RandomInstance with network, demand and budget
    """
    cfg = cfg or RandomInstanceConfig()
    rng = np.random.default_rng([seed, trial])
    n = int(rng.integers(2, cfg.max_buses + 1))
    T = int(rng.integers(1, cfg.max_period + 1))

    kinds = {1: BusKind.GENERATOR, 2: BusKind.LOAD}
    for k in range(3, n + 1):
        extra = rng.random() < cfg.extra_generator_probability
        kinds[k] = BusKind.GENERATOR if extra else BusKind.LOAD

    edges = set()
    for k in range(3, n + 1):
        parent = int(rng.integers(2, k))
        edges.add((parent, k))
    for k in range(2, n + 1):
        for l in range(k + 1, n + 1):
            if (k, l) not in edges and rng.random() < cfg.extra_edge_probability:
                edges.add((k, l))
    anchor = int(rng.integers(2, n + 1))
    edges.add((1, anchor))

    demand_values = {}
    for k in sorted(kinds):
        if kinds[k] == BusKind.LOAD:
            demand_values[k] = tuple(float(v) for v in rng.uniform(*cfg.demand_range, size=T))
    demand = DemandSeries(period=T, values=demand_values)
    floor = max(max_prefix_average(demand.total()), 1e-3)

    buses = []
    for k in sorted(kinds):
        if kinds[k] == BusKind.GENERATOR:
            if rng.random() < cfg.unbounded_gen_probability:
                gen_cap = UNBOUNDED
            else:
                gen_cap = floor * _uniform(rng, cfg.gen_cap_scale)
            cost = CostPoly(c2=_uniform(rng, cfg.c2_range), c1=_uniform(rng, cfg.c1_range))
            buses.append(Bus(id=k, kind=BusKind.GENERATOR, gen_cap=gen_cap, cost=cost))
        else:
            buses.append(Bus(id=k, kind=BusKind.LOAD))

    lines = []
    for k, l in sorted(edges):
        lines.append(Line(
            from_bus=k,
            to_bus=l,
            admittance=_uniform(rng, cfg.admittance_range),
            flow_cap=floor * _uniform(rng, cfg.line_cap_scale),
        ))

    if cfg.vary_storage:
        eff_charge = _uniform(rng, (0.8, 1.0))
        eff_discharge = _uniform(rng, (0.8, 1.0))
        storage = StorageTech(
            eff_charge=eff_charge,
            eff_discharge=eff_discharge,
            ramp_charge=_uniform(rng, (0.5, 1.0)),
            ramp_discharge=eff_discharge * _uniform(rng, (0.5, 1.0)),
        )
    else:
        storage = StorageTech()

    budget = floor * T * _uniform(rng, cfg.budget_scale)
    network = Network(buses=buses, lines=lines, storage=storage, name=f"random-{seed}-{trial}")
    return RandomInstance(seed=seed, trial=trial, network=network, demand=demand, spec=ProblemSpec(budget=budget))
