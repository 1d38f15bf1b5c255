"""Constrained-bandit handover tuning: threshold identification on a
monotone signal grid plus opportunistic measurement ordering, with the
benchmark policies, regret analysis utilities and a reproducible
experiment harness around them.
"""

from .analysis import (
    InstanceGaps,
    exploration_tradeoff,
    instance_gaps,
    misidentification_negligible,
    optimal_epsilon,
    regret_bound,
)
from .campaign import (
    BENCHMARK_POLICIES,
    CampaignMetrics,
    HandoverScenario,
    draw_campaign,
    run_budget1_campaign,
    run_campaign,
)
from .config import ExperimentConfig, default_config, load_config
from .env import (
    FailureCurve,
    NeighborCellSet,
    ServingTraceParams,
    ThresholdGrid,
    curve_eval,
    draw_handover_outcome,
    gen_serving_trace,
    pull_threshold_arm,
    sample_neighbor_signal,
)
from .episodes import (
    Action,
    EpisodeDraws,
    EpisodeResult,
    EpisodeState,
    PolicyKind,
    draw_episode,
    opportunistic_action,
    opportunistic_ts_budget1,
    run_episode_baseline,
    run_episode_opportunistic,
    select_next_cell,
)
from .errors import BattError, ConfigError, ContractViolation, InfeasibleGridError
from .learners import ArmStats, BetaPosterior, LearnerState, posterior_sample, posterior_update, ucb_index
from .oracles import OracleReport, brute_force_threshold, exhaustive_best_order, grid_min_epsilon
from .rng import RngStream
from .threshold import (
    SearchConfig,
    ThresholdRunStats,
    binary_arm_search,
    coarse_regret,
    eps_binary_search_first,
    max_searched_arms,
    true_optimal_arm,
    uniform_search_first,
)

__version__ = "0.1.0"
