"""
QP solver: interior-point method, certificates and an ADMM oracle.
"""

from .base import InfeasibilityCertificate, Solution, SolverConfig, SolverStatus
from .certificates import KKTReport, PhaseOneResult, balance_prices, kkt_report, phase_one, storage_duals
from .ipm import InteriorPointSolver, solve
from .oracle import OracleResult, oracle_solve

__all__ = [
    "InfeasibilityCertificate",
    "InteriorPointSolver",
    "KKTReport",
    "OracleResult",
    "PhaseOneResult",
    "Solution",
    "SolverConfig",
    "SolverStatus",
    "balance_prices",
    "kkt_report",
    "oracle_solve",
    "phase_one",
    "solve",
    "storage_duals",
]
