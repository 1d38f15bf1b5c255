"""Per-arm learning state: Beta posteriors for Thompson sampling and
count-based statistics for UCB and empirical-mean estimates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rng import as_generator

__all__ = [
    "BetaPosterior",
    "ArmStats",
    "posterior_update",
    "posterior_sample",
    "ucb_index",
    "LearnerState",
]


@dataclass(frozen=True)
class BetaPosterior:
    """Beta(alpha, beta) belief over one arm's success rate."""

    alpha: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError("Beta parameters must be positive")

    @property
    def mean(self) -> float:
        return self.alpha / (self.alpha + self.beta)


@dataclass
class ArmStats:
    """Pull count and accumulated reward for one arm.

    ``reward_sum`` is an integer success count under Bernoulli rewards but
    is kept as a float so deterministic test arms (reward equal to the arm
    mean) flow through the same code.
    """

    pull_count: int = 0
    reward_sum: float = 0.0

    @property
    def empirical_mean(self) -> float:
        if self.pull_count == 0:
            raise ValueError("empirical_mean is undefined before the first pull")
        return self.reward_sum / self.pull_count

    def record(self, reward: float) -> None:
        self.pull_count += 1
        self.reward_sum += reward


def posterior_update(post: BetaPosterior, reward: int) -> BetaPosterior:
    """Conjugate update for one Bernoulli observation (reward in {0, 1})."""
    if reward not in (0, 1):
        raise ValueError("reward must be 0 or 1")
    if reward:
        return BetaPosterior(post.alpha + 1.0, post.beta)
    return BetaPosterior(post.alpha, post.beta + 1.0)


def posterior_sample(post: BetaPosterior, rng) -> float:
    """One draw from the posterior. Advances the generator by one draw."""
    return float(as_generator(rng).beta(post.alpha, post.beta))


def ucb_index(stats: ArmStats, total_pulls: int, alpha_ucb: float = 2.0) -> float:
    """UCB1-style optimism index: mean + sqrt(alpha * ln(total) / count).

    Unpulled arms return +inf so they are always tried first.
    """
    if total_pulls < stats.pull_count:
        raise ValueError("total_pulls must be at least the arm's own pull count")
    if alpha_ucb <= 0:
        raise ValueError("alpha_ucb must be positive")
    if stats.pull_count == 0:
        return math.inf
    bonus = math.sqrt(alpha_ucb * math.log(total_pulls) / stats.pull_count)
    return stats.empirical_mean + bonus


class LearnerState:
    """Vectorized posterior and count state over K arms.

    This is the shared learning state a measurement policy carries across
    users in a campaign; it mirrors per-arm BetaPosterior/ArmStats values
    but stores them as arrays so per-step sampling is a single numpy call.
    """

    def __init__(self, n_arms: int, prior_alpha: float = 1.0, prior_beta: float = 1.0):
        if n_arms < 1:
            raise ValueError("n_arms must be positive")
        if prior_alpha <= 0 or prior_beta <= 0:
            raise ValueError("prior parameters must be positive")
        self.prior_alpha = float(prior_alpha)
        self.prior_beta = float(prior_beta)
        self.alphas = np.full(n_arms, float(prior_alpha))
        self.betas = np.full(n_arms, float(prior_beta))
        self.pull_counts = np.zeros(n_arms, dtype=np.int64)
        self.reward_sums = np.zeros(n_arms)
        self.total_pulls = 0
        self.total_updates = 0

    @property
    def n_arms(self) -> int:
        return self.alphas.shape[0]

    def update(self, arm: int, reward: int) -> None:
        if reward:
            self.alphas[arm] += 1.0
        else:
            self.betas[arm] += 1.0
        self.pull_counts[arm] += 1
        self.reward_sums[arm] += reward
        self.total_pulls += 1
        self.total_updates += 1

    def ts_samples(self, gen: np.random.Generator) -> np.ndarray:
        """Fresh posterior sample for every arm (one vectorized draw)."""
        return gen.beta(self.alphas, self.betas)

    def ucb_indices(self, alpha_ucb: float = 2.0) -> np.ndarray:
        out = np.full(self.n_arms, np.inf)
        pulled = self.pull_counts > 0
        if self.total_pulls > 0 and pulled.any():
            means = self.reward_sums[pulled] / self.pull_counts[pulled]
            bonus = np.sqrt(alpha_ucb * math.log(self.total_pulls) / self.pull_counts[pulled])
            out[pulled] = means + bonus
        return out

    def posteriors(self) -> list[BetaPosterior]:
        return [BetaPosterior(a, b) for a, b in zip(self.alphas, self.betas)]
