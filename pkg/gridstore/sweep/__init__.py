"""
Parameter sweeps, random instances and verification campaigns.
"""

from .campaigns import (
    CampaignReport,
    CounterexampleReport,
    TrialOutcome,
    counterexample_model,
    estimate_coincidence_budget,
    run_trial,
    verify_counterexample,
    verify_theorem1,
)
from .harness import CSV_COLUMNS, SweepPoint, SweepResult, run_sweep
from .instances import RandomInstance, generate_instance
from .plan import SweepParameter, SweepPlan, make_plan, parse_grid, parse_line_target, parse_variant

__all__ = [
    "CSV_COLUMNS",
    "CampaignReport",
    "CounterexampleReport",
    "RandomInstance",
    "SweepParameter",
    "SweepPlan",
    "SweepPoint",
    "SweepResult",
    "TrialOutcome",
    "counterexample_model",
    "estimate_coincidence_budget",
    "generate_instance",
    "make_plan",
    "parse_grid",
    "parse_line_target",
    "parse_variant",
    "run_sweep",
    "run_trial",
    "verify_counterexample",
    "verify_theorem1",
]
