"""Per-user measurement episodes.

A user enters with a decaying serving signal and K unmeasured target
cells. Each loop iteration either measures one more cell (chosen by the
active policy) or commits to a handover toward the best target seen so
far. The opportunistic rule adds two things on top of the classic
"handover once a target beats the serving signal" rule:

* once the best target already clears the sufficiency bar ``m_hat``, it
  keeps measuring only while the serving signal stays at or above
  ``m_hat + c`` (the regularity constant guarantees the next step cannot
  fall below the bar, so those measurements are risk-free);
* the moment that safety margin is gone it hands over immediately instead
  of waiting for the serving signal to fall below the best target.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .env import FailureCurve, NeighborCellSet, ServingTraceParams, curve_eval, gen_serving_trace
from .errors import ContractViolation
from .learners import LearnerState
from .rng import as_generator

__all__ = [
    "PolicyKind",
    "LEARNING_POLICIES",
    "Action",
    "EpisodeState",
    "EpisodeResult",
    "EpisodeDraws",
    "opportunistic_action",
    "select_next_cell",
    "draw_episode",
    "run_episode_opportunistic",
    "run_episode_baseline",
    "opportunistic_ts_budget1",
]


class PolicyKind(str, Enum):
    """Measurement-ordering policies under comparison."""

    OPPORTUNISTIC_TS = "opportunistic_ts"
    CLASSIC_TS = "classic_ts"
    CLASSIC_UCB = "classic_ucb"
    BASELINE = "baseline"
    ORACLE = "oracle"


LEARNING_POLICIES = frozenset(
    {PolicyKind.OPPORTUNISTIC_TS, PolicyKind.CLASSIC_TS, PolicyKind.CLASSIC_UCB}
)


class Action(Enum):
    MEASURE = "measure"
    FREE_MEASURE = "free_measure"
    HANDOVER = "handover"


@dataclass
class EpisodeState:
    """Loop state of one measurement episode.

    Sentinels: before the first observation the serving signal is +inf and
    the best target -inf, so the first iteration always measures. (Literal
    zero initializers would be meaningless against negative-dBm signals.)
    """

    m_hat: float
    c: float
    n: int = 0
    y_current: float = math.inf
    x_best: float = -math.inf
    measured: set = field(default_factory=set)


@dataclass(frozen=True)
class EpisodeResult:
    handover_target: int
    x_at_handover: float
    y_at_handover: float
    n_measurements: int
    success: int
    free_measurements: int


def opportunistic_action(x_best: float, y_current: float, m_hat: float, c: float) -> Action:
    """Branch rule of the opportunistic loop (single source of truth).

    x_best below the bar: measure while the serving signal still beats
    x_best, otherwise hand over. x_best at or above the bar: measurements
    are free while y >= m_hat + c, otherwise hand over now.
    """
    if x_best < m_hat:
        if y_current > x_best:
            return Action.MEASURE
        return Action.HANDOVER
    if y_current >= m_hat + c:
        return Action.FREE_MEASURE
    return Action.HANDOVER


def select_next_cell(
    policy: PolicyKind,
    learner: LearnerState | None,
    measured_mask: np.ndarray,
    rng,
    *,
    true_rates: np.ndarray | None = None,
    ucb_alpha: float = 2.0,
) -> int:
    """Index of the next unmeasured cell under the given policy.

    Ties resolve to the lowest index. The TS policies draw a fresh
    posterior sample for every cell on each call.
    """
    if measured_mask.all():
        raise ContractViolation("all cells are already measured")
    gen = as_generator(rng)
    if policy in (PolicyKind.OPPORTUNISTIC_TS, PolicyKind.CLASSIC_TS):
        scores = learner.ts_samples(gen)
    elif policy is PolicyKind.CLASSIC_UCB:
        scores = learner.ucb_indices(ucb_alpha)
    elif policy is PolicyKind.ORACLE:
        if true_rates is None:
            raise ContractViolation("oracle selection needs the true success rates")
        scores = true_rates
    elif policy is PolicyKind.BASELINE:
        candidates = np.nonzero(~measured_mask)[0]
        return int(candidates[gen.integers(candidates.size)])
    else:
        raise ContractViolation(f"unknown policy {policy}")
    scores = np.where(measured_mask, -np.inf, scores)
    return int(np.argmax(scores))


@dataclass(frozen=True)
class EpisodeDraws:
    """One user's realized environment randomness.

    The per-cell signals, pseudo-reward bits and outcome uniforms are drawn
    up front so different policies facing the same user observe identical
    values for identical decisions (paired-seed comparisons).
    """

    y_trace: np.ndarray        # serving signal observed at measurement n
    x_signals: np.ndarray      # (K,) target signal revealed if cell k is measured
    reward_bits: np.ndarray    # (K,) measurement-time pseudo-reward bit per cell
    f_success: np.ndarray      # 1 - failure(y) along the trace
    g_success: np.ndarray      # (K,) 1 - failure(x) per cell
    u_serving: float           # outcome uniform, serving side
    u_target: float            # outcome uniform, target side

    @property
    def n_cells(self) -> int:
        return self.x_signals.size


def draw_episode(
    curve: FailureCurve,
    cells: NeighborCellSet,
    serving: ServingTraceParams,
    rng,
) -> EpisodeDraws:
    """Realize one user's environment draws (trace, signals, outcome coins)."""
    gen = as_generator(rng)
    if serving.max_steps < cells.n_cells:
        raise ContractViolation("serving trace shorter than the number of cells")
    y_trace = gen_serving_trace(serving, gen)
    m = cells.signal_means
    h = cells.signal_half_widths
    x = m + gen.uniform(-1.0, 1.0, size=cells.n_cells) * h
    g_success = 1.0 - curve_eval(curve, x)
    reward_bits = (gen.random(cells.n_cells) < g_success).astype(np.float64)
    u_serving, u_target = gen.random(2)
    return EpisodeDraws(
        y_trace=y_trace,
        x_signals=x,
        reward_bits=reward_bits,
        f_success=1.0 - curve_eval(curve, y_trace),
        g_success=g_success,
        u_serving=float(u_serving),
        u_target=float(u_target),
    )


def _pseudo_reward(draws: EpisodeDraws, cell: int, reward_mode: str, m_hat: float) -> int:
    """Reward bit used for posterior/count updates after measuring a cell.

    "outcome": an environment-drawn Bernoulli with the cell's true
    measurement-time success probability. "indicator": 1 iff the measured
    signal clears the sufficiency bar (agent-observable, but degenerate
    when a cell's whole signal support sits on one side of the bar).
    """
    if reward_mode == "outcome":
        return int(draws.reward_bits[cell])
    if reward_mode == "indicator":
        return int(draws.x_signals[cell] >= m_hat)
    raise ContractViolation(f"unknown reward_mode {reward_mode!r}")


def _outcome(draws: EpisodeDraws, n_measurements: int, best_cell: int) -> int:
    """Success iff both sides' pre-drawn outcome coins land under their
    success probabilities at the handover signals."""
    f_ok = draws.u_serving < draws.f_success[n_measurements - 1]
    g_ok = draws.u_target < draws.g_success[best_cell]
    return int(f_ok and g_ok)


def run_episode_opportunistic(
    draws: EpisodeDraws,
    learner: LearnerState,
    rng,
    m_hat: float,
    c: float,
    *,
    reward_mode: str = "outcome",
    step_log: list | None = None,
) -> EpisodeResult:
    """Run one user under the opportunistic rule with TS cell selection.

    Updates ``learner`` in place (one update per measurement). A forced
    handover to the best seen target ends the episode when every cell has
    been measured. ``step_log``, when given, receives
    (action, x_best, y_current) tuples at each decision for invariant checks.
    """
    gen = as_generator(rng)
    K = draws.n_cells
    measured = np.zeros(K, dtype=bool)
    x_best = -math.inf
    best_cell = -1
    y = math.inf
    n = 0
    free = 0
    while n < K:
        action = opportunistic_action(x_best, y, m_hat, c)
        if step_log is not None:
            step_log.append((action, x_best, y))
        if action is Action.HANDOVER:
            break
        if action is Action.FREE_MEASURE:
            free += 1
        k = select_next_cell(PolicyKind.OPPORTUNISTIC_TS, learner, measured, gen)
        x = float(draws.x_signals[k])
        y = float(draws.y_trace[n])
        learner.update(k, _pseudo_reward(draws, k, reward_mode, m_hat))
        measured[k] = True
        if x > x_best:
            x_best = x
            best_cell = k
        n += 1
    return EpisodeResult(
        handover_target=best_cell,
        x_at_handover=x_best,
        y_at_handover=y,
        n_measurements=n,
        success=_outcome(draws, n, best_cell),
        free_measurements=free,
    )


def run_episode_baseline(
    policy: PolicyKind,
    draws: EpisodeDraws,
    learner: LearnerState | None,
    rng,
    *,
    true_rates: np.ndarray | None = None,
    ucb_alpha: float = 2.0,
    reward_mode: str = "outcome",
    m_hat: float = -math.inf,
) -> EpisodeResult:
    """Run one user under the common benchmark rule: keep measuring in the
    policy's order and hand over as soon as the best measured target beats
    the current serving signal (forced handover once all cells are
    measured). Learning policies apply the same pseudo-reward updates as
    the opportunistic loop, so comparisons isolate the ordering rule."""
    if policy is PolicyKind.OPPORTUNISTIC_TS:
        raise ContractViolation("use run_episode_opportunistic for the opportunistic policy")
    gen = as_generator(rng)
    K = draws.n_cells
    measured = np.zeros(K, dtype=bool)
    x_best = -math.inf
    best_cell = -1
    y = math.inf
    n = 0
    learning = policy in LEARNING_POLICIES
    while n < K:
        k = select_next_cell(
            policy, learner, measured, gen, true_rates=true_rates, ucb_alpha=ucb_alpha
        )
        x = float(draws.x_signals[k])
        y = float(draws.y_trace[n])
        if learning:
            learner.update(k, _pseudo_reward(draws, k, reward_mode, m_hat))
        measured[k] = True
        if x > x_best:
            x_best = x
            best_cell = k
        n += 1
        if x_best > y:
            break
    return EpisodeResult(
        handover_target=best_cell,
        x_at_handover=x_best,
        y_at_handover=y,
        n_measurements=n,
        success=_outcome(draws, n, best_cell),
        free_measurements=0,
    )


def opportunistic_ts_budget1(
    draws: EpisodeDraws,
    learner: LearnerState,
    rng,
    *,
    reward_mode: str = "outcome",
    m_hat: float = -math.inf,
) -> EpisodeResult:
    """Measurement budget forced to one: measure a single TS-selected cell
    and hand over to it. The cell choice consumes the stream exactly like
    the classic TS first choice, so paired streams give bit-identical arms."""
    gen = as_generator(rng)
    K = draws.n_cells
    measured = np.zeros(K, dtype=bool)
    k = select_next_cell(PolicyKind.CLASSIC_TS, learner, measured, gen)
    x = float(draws.x_signals[k])
    y = float(draws.y_trace[0])
    learner.update(k, _pseudo_reward(draws, k, reward_mode, m_hat))
    return EpisodeResult(
        handover_target=k,
        x_at_handover=x,
        y_at_handover=y,
        n_measurements=1,
        success=_outcome(draws, 1, k),
        free_measurements=0,
    )
