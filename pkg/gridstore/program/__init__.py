"""
Program builder: standard-form convex QP encoding of the placement problem.
"""

from .spec import ProblemSpec, variant_label
from .program import ConvexProgram, FeasibilityReport, RowInfo, VariableBlock, VariableIndex, Violation
from .builder import build, implied_budget

__all__ = [
    "ConvexProgram",
    "FeasibilityReport",
    "ProblemSpec",
    "RowInfo",
    "VariableBlock",
    "VariableIndex",
    "Violation",
    "build",
    "implied_budget",
    "variant_label",
]
