"""Closed-form analysis utilities for the search-then-commit regret.

All logarithms here are natural logs. ``delta`` is the instance hardness
min(Delta, D/2) where Delta is the optimal arm's clearance above R and D
is the smallest mean gap between the optimal arm and any other arm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .env import ThresholdGrid
from .errors import ContractViolation
from .threshold import true_optimal_arm

__all__ = [
    "InstanceGaps",
    "optimal_epsilon",
    "regret_bound",
    "exploration_tradeoff",
    "instance_gaps",
    "misidentification_negligible",
]

_EPS_FLOOR = 1e-12


@dataclass(frozen=True)
class InstanceGaps:
    """Gap quantities of one grid instance relative to a threshold R.

    Delta: clearance of the optimal arm above R.
    D:     smallest distance from the optimal arm's mean to any distinct
           other mean.
    d:     smallest distance from any arm's mean to R itself.
    delta: min(Delta, D/2), the rate that drives the regret bound.
    """

    Delta: float
    D: float
    d: float

    @property
    def delta(self) -> float:
        return min(self.Delta, self.D / 2.0)


def instance_gaps(grid: ThresholdGrid, R: float) -> InstanceGaps:
    """Compute the gap quantities from a grid's true success rates."""
    m = true_optimal_arm(grid, R)
    probs = grid.success_probs
    delta_clearance = float(probs[m] - R)
    others = np.abs(probs - probs[m])
    others = others[others > 0]
    if others.size == 0:
        raise ContractViolation("instance gaps undefined: all arms share the optimal mean")
    return InstanceGaps(
        Delta=delta_clearance,
        D=float(others.min()),
        d=float(np.abs(probs - R).min()),
    )


def _validate(J: int, T: int, delta: float) -> None:
    if J < 2:
        raise ContractViolation("J must be at least 2")
    if T < 1:
        raise ContractViolation("T must be positive")
    if delta <= 0:
        raise ContractViolation("delta must be positive")


def exploration_tradeoff(epsilon, J: int, T: int, delta: float):
    """The budget/misidentification trade-off curve

        h(eps) = eps*T + 3*T*J*exp(-2*(eps*T/ln(J) - 1)*delta^2)

    whose minimizer is the closed form in :func:`optimal_epsilon`.
    """
    _validate(J, T, delta)
    eps = np.asarray(epsilon, dtype=float)
    log_j = math.log(J)
    out = eps * T + 3.0 * T * J * np.exp(-2.0 * (eps * T / log_j - 1.0) * delta**2)
    if np.ndim(epsilon) == 0:
        return float(out)
    return out


def optimal_epsilon(J: int, T: int, delta: float) -> float:
    """Exploration fraction minimizing the trade-off curve, clamped to (0, 1]:

        eps* = ln(J)/T - (ln(J) / (2*T*delta^2)) * ln( ln(J) / (6*delta^2*T*J) )
    """
    _validate(J, T, delta)
    log_j = math.log(J)
    eps = log_j / T - (log_j / (2.0 * T * delta**2)) * math.log(
        log_j / (6.0 * delta**2 * T * J)
    )
    return float(min(1.0, max(_EPS_FLOOR, eps)))


def regret_bound(J: int, T: int, delta: float) -> float:
    """Coarse-regret upper bound at the optimal exploration fraction:

        ln(J) * ( ln(6*delta^2*T*J)/(2*delta^2) - ln(ln(J))/(2*delta^2)
                  + 1/(2*delta^2) + 1 )
    """
    _validate(J, T, delta)
    if 6.0 * delta**2 * T * J <= 1.0:
        raise ContractViolation("bound requires 6*delta^2*T*J > 1")
    log_j = math.log(J)
    two_d2 = 2.0 * delta**2
    return float(
        log_j
        * (
            math.log(6.0 * delta**2 * T * J) / two_d2
            - math.log(log_j) / two_d2
            + 1.0 / two_d2
            + 1.0
        )
    )


def misidentification_negligible(d: float, J: int, T: int, pulls_per_arm: int) -> bool:
    """Whether the search is statistically sharp enough for the bound.

    With P pulls per searched arm, the probability that some searched arm's
    empirical comparison against R comes out wrong is at most
    ln(J) * exp(-2*P*d^2), which is below 1/T once

        d > sqrt( ln(T * ln(J)) / (2*P) ).

    The regret bound is only meaningful on instances satisfying this.
    """
    _validate(J, T, d)
    if pulls_per_arm < 1:
        raise ContractViolation("pulls_per_arm must be positive")
    return d > math.sqrt(math.log(T * math.log(J)) / (2.0 * pulls_per_arm))
