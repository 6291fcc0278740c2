"""
Closed-form results for SGSL and star networks and the constructive
purify / transfer steps on an optimum.
"""

from .constructions import exchange_gain, purify, transfer_storage
from .report import INFEASIBLE, AnalyticReport, BranchReport, Infeasible
from .segmentation import KKTMultipliers, TauSegmentation, sgsl_kkt_multipliers, tau_sequence, unconstrained_dispatch
from .sgsl import analyze_sgsl, f_min_sgsl, h_min_sgsl, h_sat, max_prefix_average
from .star import analyze_star, h_min_star

__all__ = [
    "INFEASIBLE",
    "AnalyticReport",
    "BranchReport",
    "Infeasible",
    "KKTMultipliers",
    "TauSegmentation",
    "analyze_sgsl",
    "analyze_star",
    "exchange_gain",
    "f_min_sgsl",
    "h_min_sgsl",
    "h_min_star",
    "h_sat",
    "max_prefix_average",
    "purify",
    "sgsl_kkt_multipliers",
    "tau_sequence",
    "transfer_storage",
    "unconstrained_dispatch",
]
