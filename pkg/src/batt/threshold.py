"""Threshold identification on the serving-signal grid.

Finds the lowest grid level whose true handover success rate clears a
required threshold R, spending a bounded exploration budget. Two searchers
share the selection rule and the accounting:

* binary search over arms (halving the index range on each empirical
  comparison against R), then commit;
* a uniform baseline that spreads the same budget evenly over all arms,
  then commits.

Arm indices are 0-based throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .env import ThresholdGrid
from .errors import ContractViolation, InfeasibleGridError
from .rng import RngStream

__all__ = [
    "SearchConfig",
    "SearchStep",
    "ThresholdRunStats",
    "ArmPullSource",
    "NoiselessArmSource",
    "true_optimal_arm",
    "binary_arm_search",
    "eps_binary_search_first",
    "uniform_search_first",
    "coarse_regret",
    "max_searched_arms",
]


@dataclass(frozen=True)
class SearchConfig:
    """Budget and threshold for one search run.

    ``pulls_per_arm`` is floor(epsilon*T / log2(J)): the binary search
    visits at most ceil(log2 J) + 1 arms, so this keeps exploration within
    roughly an epsilon fraction of the horizon.
    """

    J: int
    T: int
    R: float
    epsilon: float

    def __post_init__(self):
        if self.J < 1:
            raise ValueError("J must be positive")
        if self.T < 1:
            raise ValueError("T must be positive")
        if not 0.0 <= self.R <= 1.0:
            raise ValueError("R must lie in [0, 1]")
        if not 0.0 < self.epsilon <= 1.0:
            raise ValueError("epsilon must lie in (0, 1]")
        if self.pulls_per_arm < 1:
            raise ValueError("exploration budget gives no pulls per arm (epsilon*T too small)")
        if max_searched_arms(self.J) * self.pulls_per_arm > self.T:
            raise ValueError("exploration budget can exceed the horizon T")

    @property
    def pulls_per_arm(self) -> int:
        if self.J >= 2:
            return int(self.epsilon * self.T / math.log2(self.J))
        return int(self.epsilon * self.T)


def max_searched_arms(j: int) -> int:
    """Upper bound on how many distinct arms a binary search can visit."""
    if j < 2:
        return 1
    return math.ceil(math.log2(j)) + 1


class ArmPullSource:
    """Lazy per-arm Bernoulli outcome streams.

    Each arm owns an independent substream consumed in pull order, so two
    searchers built on the same base stream observe identical outcomes for
    the i-th pull of any given arm no matter when they pull it. That is the
    paired-seed contract used by the experiment harness.
    """

    def __init__(self, grid: ThresholdGrid, stream: RngStream):
        self._probs = grid.success_probs
        self._stream = stream
        self._gens: dict[int, np.random.Generator] = {}

    def draw(self, arm: int, n: int) -> np.ndarray:
        if not 0 <= arm < self._probs.size:
            raise ContractViolation(f"arm index {arm} outside grid of size {self._probs.size}")
        gen = self._gens.get(arm)
        if gen is None:
            gen = self._stream.substream(arm).generator()
            self._gens[arm] = gen
        return (gen.random(n) < self._probs[arm]).astype(np.float64)


class NoiselessArmSource:
    """Deterministic arms: every pull returns the arm's true mean."""

    def __init__(self, grid: ThresholdGrid):
        self._probs = grid.success_probs

    def draw(self, arm: int, n: int) -> np.ndarray:
        if not 0 <= arm < self._probs.size:
            raise ContractViolation(f"arm index {arm} outside grid of size {self._probs.size}")
        return np.full(n, self._probs[arm])


def _resolve_source(grid, rng, source):
    if source is not None:
        return source
    if rng is None:
        raise ValueError("either rng or source must be provided")
    stream = rng if isinstance(rng, RngStream) else None
    if stream is None:
        raise TypeError("rng must be an RngStream (per-arm substreams are derived from it)")
    return ArmPullSource(grid, stream)


@dataclass(frozen=True)
class SearchStep:
    """One recursion step of the binary arm search."""

    start: int
    end: int
    arm: int
    r_hat: float
    went_left: bool


def true_optimal_arm(grid: ThresholdGrid, R: float) -> int:
    """Smallest arm index whose TRUE success rate meets R (the test oracle)."""
    qualifying = np.nonzero(grid.success_probs >= R)[0]
    if qualifying.size == 0:
        raise InfeasibleGridError(f"no arm has success probability >= {R}")
    return int(qualifying[0])


def binary_arm_search(grid, pulls_per_arm, R, start, end, rng=None, source=None):
    """Run the halving search on the inclusive index range [start, end].

    Returns ``(searched, steps)`` where ``searched`` is a list of
    ``(arm, rewards)`` pairs in visit order and ``steps`` records each
    recursion step. The midpoint is ceil(start + (end-start)/2); an
    empirical mean at or above R sends the search left (toward weaker
    signals), otherwise right.
    """
    if start < 0 or end > grid.n_arms - 1:
        raise ContractViolation("search range outside the grid")
    if pulls_per_arm < 1:
        raise ContractViolation("pulls_per_arm must be positive")
    src = _resolve_source(grid, rng, source)
    searched: list[tuple[int, np.ndarray]] = []
    steps: list[SearchStep] = []
    lo, hi = start, end
    while hi >= lo:
        arm = math.ceil(lo + (hi - lo) / 2)
        rewards = src.draw(arm, pulls_per_arm)
        r_hat = float(rewards.mean())
        went_left = r_hat >= R
        searched.append((arm, rewards))
        steps.append(SearchStep(lo, hi, arm, r_hat, went_left))
        if went_left:
            hi = arm - 1
        else:
            lo = arm + 1
    return searched, steps


@dataclass
class ThresholdRunStats:
    """Everything recorded about one T-round search-and-commit run."""

    pulls: np.ndarray
    searched_arms: list[int]
    selected_arm: int
    optimal_arm: int
    violations: int
    cum_signed_diff: float
    coarse_regret: int
    explore_rounds: int
    round_arms: np.ndarray
    round_rewards: np.ndarray
    steps: list[SearchStep] = field(default_factory=list)

    @property
    def T(self) -> int:
        return int(self.round_arms.size)


def _select_arm(arm_indices: np.ndarray, r_hats: np.ndarray, R: float) -> int:
    """Commit rule: among candidates with r_hat >= R pick the one closest
    to R (lowest index on ties); if none qualifies, fall back to the
    largest estimate (the least-violating choice)."""
    qualifying = r_hats >= R
    if qualifying.any():
        idx = np.nonzero(qualifying)[0]
        gaps = np.abs(r_hats[idx] - R)
        order = np.lexsort((arm_indices[idx], gaps))
        return int(arm_indices[idx[order[0]]])
    order = np.lexsort((arm_indices, -r_hats))
    return int(arm_indices[order[0]])


def _finish_run(cfg, grid, searched, steps, source) -> ThresholdRunStats:
    """Commit to an arm, spend the remaining rounds on it, tally metrics."""
    arm_indices = np.array([a for a, _ in searched], dtype=np.int64)
    r_hats = np.array([r.mean() for _, r in searched])
    selected = _select_arm(arm_indices, r_hats, cfg.R)

    explore_arms = np.concatenate(
        [np.full(r.size, a, dtype=np.int64) for a, r in searched]
    )
    explore_rewards = np.concatenate([r for _, r in searched])
    explore_rounds = explore_arms.size
    if explore_rounds > cfg.T:
        raise ContractViolation("exploration exceeded the horizon")

    exploit_rounds = cfg.T - explore_rounds
    exploit_rewards = source.draw(selected, exploit_rounds)
    round_arms = np.concatenate([explore_arms, np.full(exploit_rounds, selected, dtype=np.int64)])
    round_rewards = np.concatenate([explore_rewards, exploit_rewards])

    pulls = np.bincount(round_arms, minlength=grid.n_arms)
    optimal = true_optimal_arm(grid, cfg.R)
    true_probs = grid.success_probs
    violations = int(np.count_nonzero(true_probs[round_arms] < cfg.R))
    cum_signed_diff = float(np.sum(grid.levels[round_arms] - grid.levels[optimal]))
    return ThresholdRunStats(
        pulls=pulls,
        searched_arms=[int(a) for a in arm_indices],
        selected_arm=selected,
        optimal_arm=optimal,
        violations=violations,
        cum_signed_diff=cum_signed_diff,
        coarse_regret=int(cfg.T - pulls[optimal]),
        explore_rounds=explore_rounds,
        round_arms=round_arms,
        round_rewards=round_rewards,
        steps=steps,
    )


def eps_binary_search_first(cfg: SearchConfig, grid: ThresholdGrid, rng=None, *, source=None):
    """Binary-search the grid with ``pulls_per_arm`` per visited arm, then
    commit to the searched arm whose estimate is closest to R from above
    and play it for every remaining round."""
    if grid.n_arms != cfg.J:
        raise ContractViolation("config J does not match the grid size")
    src = _resolve_source(grid, rng, source)
    searched, steps = binary_arm_search(
        grid, cfg.pulls_per_arm, cfg.R, 0, grid.n_arms - 1, source=src
    )
    return _finish_run(cfg, grid, searched, steps, src)


def uniform_search_first(cfg: SearchConfig, grid: ThresholdGrid, rng=None, *, source=None):
    """Spend the epsilon*T budget evenly over all arms in index order
    (weakest signal first), then commit by the same rule as the binary
    searcher, choosing among ALL arms."""
    if grid.n_arms != cfg.J:
        raise ContractViolation("config J does not match the grid size")
    per_arm = int(cfg.epsilon * cfg.T / cfg.J)
    if per_arm < 1:
        raise ContractViolation("uniform search needs epsilon*T >= J")
    src = _resolve_source(grid, rng, source)
    searched = [(arm, src.draw(arm, per_arm)) for arm in range(grid.n_arms)]
    return _finish_run(cfg, grid, searched, [], src)


def coarse_regret(stats: ThresholdRunStats, m_index: int) -> int:
    """Rounds not spent on the optimal arm: T minus its pull count."""
    total = int(stats.pulls.sum())
    if total != stats.T:
        raise ContractViolation("pull counts do not sum to T")
    return int(stats.T - stats.pulls[m_index])
