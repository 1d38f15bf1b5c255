"""Sequential campaigns: T users share one learning state.

A campaign runs the same measurement policy for a sequence of users.
Posterior/count state persists across users within a campaign and is reset
between campaigns. All environment randomness for the T users is drawn up
front from a dedicated stream so that different policies can be run
against literally the same users (paired comparisons); policy-internal
randomness lives on per-policy substreams.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .env import (
    FailureCurve,
    NeighborCellSet,
    ServingTraceParams,
    curve_eval,
    gen_serving_traces,
    sample_neighbor_signals,
)
from .episodes import (
    LEARNING_POLICIES,
    EpisodeDraws,
    PolicyKind,
    opportunistic_ts_budget1,
    run_episode_baseline,
    run_episode_opportunistic,
    select_next_cell,
)
from .errors import ContractViolation
from .learners import LearnerState
from .rng import RngStream

__all__ = [
    "HandoverScenario",
    "CampaignDraws",
    "CampaignMetrics",
    "draw_campaign",
    "run_campaign",
    "run_budget1_campaign",
    "BENCHMARK_POLICIES",
]

# Canonical benchmark order (also the CSV row order).
BENCHMARK_POLICIES = (
    PolicyKind.ORACLE,
    PolicyKind.OPPORTUNISTIC_TS,
    PolicyKind.CLASSIC_TS,
    PolicyKind.CLASSIC_UCB,
    PolicyKind.BASELINE,
)

_POLICY_STREAM = {
    PolicyKind.ORACLE: 1,
    PolicyKind.OPPORTUNISTIC_TS: 2,
    PolicyKind.CLASSIC_TS: 3,
    PolicyKind.CLASSIC_UCB: 4,
    PolicyKind.BASELINE: 5,
}
_ENV_STREAM = 0
_BUDGET1_STREAM = {PolicyKind.CLASSIC_TS: 6, PolicyKind.ORACLE: 7}


@dataclass(frozen=True)
class HandoverScenario:
    """Environment plus algorithm constants for one handover campaign."""

    curve: FailureCurve
    cells: NeighborCellSet
    serving: ServingTraceParams
    m_hat: float
    c: float
    ucb_alpha: float = 2.0
    prior_alpha: float = 1.0
    prior_beta: float = 1.0
    reward_mode: str = "outcome"

    def __post_init__(self):
        if self.serving.max_steps < self.cells.n_cells:
            raise ValueError("serving.max_steps must cover one step per cell")
        if self.c < 0:
            raise ValueError("regularity constant must be nonnegative")
        if self.reward_mode not in ("outcome", "indicator"):
            raise ValueError("reward_mode must be 'outcome' or 'indicator'")

    def new_learner(self) -> LearnerState:
        return LearnerState(self.cells.n_cells, self.prior_alpha, self.prior_beta)


@dataclass(frozen=True)
class CampaignDraws:
    """Pre-drawn environment randomness for a block of users."""

    y_traces: np.ndarray      # (T, max_steps)
    x_signals: np.ndarray     # (T, K)
    reward_bits: np.ndarray   # (T, K)
    f_success: np.ndarray     # (T, max_steps)
    g_success: np.ndarray     # (T, K)
    u_serving: np.ndarray     # (T,)
    u_target: np.ndarray      # (T,)

    @property
    def n_users(self) -> int:
        return self.y_traces.shape[0]

    def episode(self, u: int) -> EpisodeDraws:
        return EpisodeDraws(
            y_trace=self.y_traces[u],
            x_signals=self.x_signals[u],
            reward_bits=self.reward_bits[u],
            f_success=self.f_success[u],
            g_success=self.g_success[u],
            u_serving=self.u_serving[u],
            u_target=self.u_target[u],
        )


def draw_campaign(scenario: HandoverScenario, n_users: int, rng: RngStream) -> CampaignDraws:
    """Realize all environment randomness for ``n_users`` in fixed draw order."""
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    y_traces = gen_serving_traces(scenario.serving, n_users, gen)
    x_signals = sample_neighbor_signals(scenario.cells, n_users, gen)
    g_success = 1.0 - curve_eval(scenario.curve, x_signals)
    reward_bits = (gen.random(x_signals.shape) < g_success).astype(np.float64)
    u_serving = gen.random(n_users)
    u_target = gen.random(n_users)
    return CampaignDraws(
        y_traces=y_traces,
        x_signals=x_signals,
        reward_bits=reward_bits,
        f_success=1.0 - curve_eval(scenario.curve, y_traces),
        g_success=g_success,
        u_serving=u_serving,
        u_target=u_target,
    )


@dataclass
class CampaignMetrics:
    """Per-user outcomes of one campaign."""

    policy: PolicyKind
    success: np.ndarray
    n_measurements: np.ndarray
    free_measurements: np.ndarray
    y_at_handover: np.ndarray
    x_at_handover: np.ndarray
    handover_target: np.ndarray
    learner: LearnerState | None = None

    @property
    def n_users(self) -> int:
        return self.success.size

    @property
    def success_rate(self) -> float:
        return float(self.success.mean())

    @property
    def cum_successes(self) -> np.ndarray:
        return np.cumsum(self.success)


def _metrics_arrays(n_users: int):
    return dict(
        success=np.zeros(n_users, dtype=np.int8),
        n_measurements=np.zeros(n_users, dtype=np.int16),
        free_measurements=np.zeros(n_users, dtype=np.int16),
        y_at_handover=np.zeros(n_users),
        x_at_handover=np.zeros(n_users),
        handover_target=np.zeros(n_users, dtype=np.int16),
    )


def run_campaign(
    policy: PolicyKind,
    scenario: HandoverScenario,
    n_users: int,
    stream: RngStream,
    draws: CampaignDraws | None = None,
) -> CampaignMetrics:
    """Run ``n_users`` sequential episodes under one policy.

    ``stream`` seeds both the environment substream (shared across
    policies, so passing the same stream to every policy pairs them on
    identical users) and the policy's private decision substream.
    """
    if n_users < 1:
        raise ContractViolation("n_users must be positive")
    if draws is None:
        draws = draw_campaign(scenario, n_users, stream.substream(_ENV_STREAM))
    elif draws.n_users < n_users:
        raise ContractViolation("draws cover fewer users than requested")
    gen = stream.substream(_POLICY_STREAM[policy]).generator()
    learner = scenario.new_learner() if policy in LEARNING_POLICIES else None
    true_rates = scenario.cells.true_success_rates
    out = _metrics_arrays(n_users)
    opportunistic = policy is PolicyKind.OPPORTUNISTIC_TS
    for u in range(n_users):
        ep = draws.episode(u)
        if opportunistic:
            res = run_episode_opportunistic(
                ep, learner, gen, scenario.m_hat, scenario.c, reward_mode=scenario.reward_mode
            )
        else:
            res = run_episode_baseline(
                policy,
                ep,
                learner,
                gen,
                true_rates=true_rates,
                ucb_alpha=scenario.ucb_alpha,
                reward_mode=scenario.reward_mode,
                m_hat=scenario.m_hat,
            )
        out["success"][u] = res.success
        out["n_measurements"][u] = res.n_measurements
        out["free_measurements"][u] = res.free_measurements
        out["y_at_handover"][u] = res.y_at_handover
        out["x_at_handover"][u] = res.x_at_handover
        out["handover_target"][u] = res.handover_target
    return CampaignMetrics(policy=policy, learner=learner, **out)


def run_budget1_campaign(
    policy: PolicyKind,
    scenario: HandoverScenario,
    n_users: int,
    stream: RngStream,
    draws: CampaignDraws | None = None,
) -> CampaignMetrics:
    """Measurement budget forced to one for every user.

    Supports the TS variant (reduces to classic Thompson sampling) and the
    oracle (always measures the best-rate cell). Used by the equivalence
    and sublinear-regret checks.
    """
    if policy not in _BUDGET1_STREAM:
        raise ContractViolation("budget-1 campaigns support classic_ts and oracle only")
    if draws is None:
        draws = draw_campaign(scenario, n_users, stream.substream(_ENV_STREAM))
    gen = stream.substream(_BUDGET1_STREAM[policy]).generator()
    learner = scenario.new_learner()
    out = _metrics_arrays(n_users)
    K = scenario.cells.n_cells
    none_measured = np.zeros(K, dtype=bool)
    true_rates = scenario.cells.true_success_rates
    for u in range(n_users):
        ep = draws.episode(u)
        if policy is PolicyKind.CLASSIC_TS:
            res = opportunistic_ts_budget1(
                ep, learner, gen, reward_mode=scenario.reward_mode, m_hat=scenario.m_hat
            )
        else:
            k = select_next_cell(
                PolicyKind.ORACLE, None, none_measured, gen, true_rates=true_rates
            )
            f_ok = ep.u_serving < ep.f_success[0]
            g_ok = ep.u_target < ep.g_success[k]
            res_success = int(f_ok and g_ok)
            out["success"][u] = res_success
            out["n_measurements"][u] = 1
            out["y_at_handover"][u] = ep.y_trace[0]
            out["x_at_handover"][u] = ep.x_signals[k]
            out["handover_target"][u] = k
            continue
        out["success"][u] = res.success
        out["n_measurements"][u] = res.n_measurements
        out["y_at_handover"][u] = res.y_at_handover
        out["x_at_handover"][u] = res.x_at_handover
        out["handover_target"][u] = res.handover_target
    return CampaignMetrics(policy=policy, learner=learner, **out)
