"""
Maximal-prefix-average segmentation of a demand profile and the
closed-form dispatch it induces for a single generator with unlimited
storage, line and generation capacity.

Arithmetic runs on exact fractions so ties between running averages are
detected exactly; the largest maximizing t wins.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Sequence, Tuple

import numpy as np

from ..errors import AnalyticError
from ..model.types import CostPoly


def exact_series(d: Sequence[float], allow_negative: bool = False) -> List[Fraction]:
    """Convert a demand profile to exact fractions, checking it."""
    values = [Fraction(float(v)) for v in d]
    if not values:
        raise AnalyticError("Demand series is empty")
    if not allow_negative and any(v < 0 for v in values):
        raise AnalyticError(
            "Closed forms require nonnegative demand",
            suggestions=["Renewable buses with negative demand are supported by the solver only"],
        )
    return values


def prefix_sums(values: Sequence[Fraction]) -> List[Fraction]:
    sums = [Fraction(0)]
    for v in values:
        sums.append(sums[-1] + v)
    return sums


@dataclass(frozen=True)
class TauSegmentation:
    """
    Breakpoints 0 = tau_0 < tau_1 < ... < tau_M = T and segment averages.

    Averages are nonincreasing and the first equals the maximal prefix
    average of the demand.
    """
    breakpoints: Tuple[int, ...]
    averages: Tuple[float, ...]
    exact_averages: Tuple[Fraction, ...]

    @property
    def segments(self) -> List[Tuple[int, int, float]]:
        """(start, end, average) with 1-based inclusive end and exclusive start."""
        return [
            (self.breakpoints[m], self.breakpoints[m + 1], self.averages[m])
            for m in range(len(self.averages))
        ]

    @property
    def period(self) -> int:
        return self.breakpoints[-1]

    def step_profile(self) -> np.ndarray:
        profile = np.zeros(self.period)
        for start, end, average in self.segments:
            profile[start:end] = average
        return profile

    def to_dict(self):
        return {"breakpoints": list(self.breakpoints), "averages": list(self.averages)}


def tau_sequence(d: Sequence[float]) -> TauSegmentation:
    """
    Segment a profile by iterated maximal prefix averages.

    Args:
        d: Nonnegative demand over one period

    Returns:
        TauSegmentation with the largest-t tie-break
    """
    values = exact_series(d)
    sums = prefix_sums(values)
    T = len(values)

    breakpoints = [0]
    averages: List[Fraction] = []
    start = 0
    while start < T:
        best_t, best_avg = start + 1, None
        for t in range(start + 1, T + 1):
            avg = (sums[t] - sums[start]) / (t - start)
            if best_avg is None or avg >= best_avg:
                best_t, best_avg = t, avg
        breakpoints.append(best_t)
        averages.append(best_avg)
        start = best_t

    return TauSegmentation(
        breakpoints=tuple(breakpoints),
        averages=tuple(float(a) for a in averages),
        exact_averages=tuple(averages),
    )


def unconstrained_dispatch(d: Sequence[float], cost: CostPoly) -> np.ndarray:
    """
    Optimal generation with unlimited storage, line and generation capacity.

    Generation equals the segment average on every segment.

    Raises:
        AnalyticError: cost not strictly convex or demand invalid
    """
    if not cost.strictly_convex:
        raise AnalyticError(
            "Unconstrained dispatch requires a strictly convex cost (c2 > 0)",
            detail=f"c2={cost.c2}",
        )
    return tau_sequence(d).step_profile()


@dataclass(frozen=True)
class KKTMultipliers:
    """
    Closed-form multipliers of the unconstrained single-generator problem.

    Attributes:
        ell: Multiplier of s(t) >= 0 at each t (nonzero only at breakpoints)
        nu: Multiplier of the periodicity constraint
        lam: Multiplier of s(t) <= b (identically zero)
    """
    ell: np.ndarray
    nu: float
    lam: np.ndarray


def sgsl_kkt_multipliers(d: Sequence[float], cost: CostPoly) -> KKTMultipliers:
    """ell(tau_m) = c'(a_m) - c'(a_{m+1}) for m < M, nu = -c'(a_M)."""
    tau = tau_sequence(d)
    if not cost.strictly_convex:
        raise AnalyticError("Multipliers require a strictly convex cost (c2 > 0)")
    ell = np.zeros(tau.period)
    for m in range(len(tau.averages) - 1):
        boundary = tau.breakpoints[m + 1]
        ell[boundary - 1] = cost.derivative(tau.averages[m]) - cost.derivative(tau.averages[m + 1])
    nu = -float(cost.derivative(tau.averages[-1]))
    return KKTMultipliers(ell=ell, nu=nu, lam=np.zeros(tau.period))
