"""Reproducible experiment drivers and their CSV outputs.

Every output byte is a function of (config, base seed): trials run on
disjoint substreams keyed by trial index, compared algorithms inside one
trial share the same environment substreams, and files are written by the
parent process in a fixed order regardless of worker scheduling.
"""

from __future__ import annotations

import itertools
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from .campaign import (
    BENCHMARK_POLICIES,
    CampaignMetrics,
    draw_campaign,
    run_campaign,
)
from .config import ExperimentConfig
from .episodes import PolicyKind
from .errors import ConfigError
from .rng import RngStream
from .threshold import (
    ArmPullSource,
    ThresholdRunStats,
    eps_binary_search_first,
    uniform_search_first,
)

__all__ = [
    "run_threshold_experiment",
    "run_handover_experiment",
    "run_sweep",
    "ThresholdExperimentResult",
    "HandoverExperimentResult",
    "SweepResult",
    "SEARCHER_NAMES",
]

_CSV_VERSION = "batt-csv v1"
SEARCHER_NAMES = ("eps_binary_search_first", "uniform_search_first")

# Top-level stream tags so the three experiment kinds never share draws.
_TAG_THRESHOLD = 0
_TAG_HANDOVER = 1


def _write_csv(frame: pd.DataFrame, path: Path, kind: str, append: bool = False) -> None:
    mode = "a" if append and path.exists() else "w"
    with open(path, mode) as fh:
        if mode == "w":
            fh.write(f"# {_CSV_VERSION}: {kind}\n")
            frame.to_csv(fh, index=False, header=True)
        else:
            frame.to_csv(fh, index=False, header=False)


def _series_stride(t: int, points: int = 500) -> np.ndarray:
    """Round indices at which cumulative series are emitted for plotting."""
    stride = max(1, t // points)
    idx = np.arange(stride - 1, t, stride)
    if idx.size == 0 or idx[-1] != t - 1:
        idx = np.append(idx, t - 1)
    return idx


# ---------------------------------------------------------------------------
# threshold experiment
# ---------------------------------------------------------------------------


def violation_series(stats: ThresholdRunStats, grid, R: float) -> np.ndarray:
    """Cumulative count of rounds whose pulled arm truly violates R."""
    return np.cumsum(grid.success_probs[stats.round_arms] < R)


def signed_diff_series(stats: ThresholdRunStats, grid) -> np.ndarray:
    """Cumulative signal-level difference from the optimal threshold."""
    return np.cumsum(grid.levels[stats.round_arms] - grid.levels[stats.optimal_arm])


@dataclass
class ThresholdExperimentResult:
    config: ExperimentConfig
    runs: dict[str, list[ThresholdRunStats]]
    per_trial: pd.DataFrame
    summary: pd.DataFrame


def run_threshold_experiment(config: ExperimentConfig, out_dir=None) -> ThresholdExperimentResult:
    """Run both searchers over paired trials and summarize their metrics."""
    grid = config.grid()
    scfg = config.search_config()
    base = RngStream(config.base_seed)
    runs: dict[str, list[ThresholdRunStats]] = {name: [] for name in SEARCHER_NAMES}
    searchers = {
        "eps_binary_search_first": eps_binary_search_first,
        "uniform_search_first": uniform_search_first,
    }
    for trial in range(config.trials):
        arm_stream = base.substream(_TAG_THRESHOLD, trial)
        for name, fn in searchers.items():
            # A fresh source per searcher over the SAME stream: pull i of
            # arm j is identical across searchers (paired comparison).
            stats = fn(scfg, grid, source=ArmPullSource(grid, arm_stream))
            runs[name].append(stats)

    rows = []
    for name in SEARCHER_NAMES:
        for trial, stats in enumerate(runs[name]):
            rows.append(
                dict(
                    searcher=name,
                    trial=trial,
                    selected_arm=stats.selected_arm,
                    selected_z_dbm=float(grid.levels[stats.selected_arm]),
                    optimal_arm=stats.optimal_arm,
                    violations=stats.violations,
                    cum_signed_diff=stats.cum_signed_diff,
                    abs_cum_signed_diff=abs(stats.cum_signed_diff),
                    coarse_regret=stats.coarse_regret,
                    explore_rounds=stats.explore_rounds,
                    searched_arms=len(stats.searched_arms),
                )
            )
    per_trial = pd.DataFrame(rows)
    summary = empirical_summary(
        per_trial,
        group="searcher",
        metrics=("violations", "cum_signed_diff", "abs_cum_signed_diff", "coarse_regret"),
    )

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        config.save(out / "config.yaml")
        if config.data["run"]["write_per_round"]:
            for name in SEARCHER_NAMES:
                path = out / f"threshold_rounds_{name}.csv"
                for trial, stats in enumerate(runs[name]):
                    frame = pd.DataFrame(
                        dict(
                            trial=trial,
                            round=np.arange(stats.T),
                            arm=stats.round_arms,
                            z_dbm=grid.levels[stats.round_arms],
                            outcome=stats.round_rewards,
                            phase=np.where(
                                np.arange(stats.T) < stats.explore_rounds, "explore", "exploit"
                            ),
                        )
                    )
                    _write_csv(frame, path, "threshold-rounds", append=trial > 0)
        series_rows = []
        for name in SEARCHER_NAMES:
            for trial, stats in enumerate(runs[name]):
                idx = _series_stride(stats.T)
                viol = violation_series(stats, grid, scfg.R)
                diff = signed_diff_series(stats, grid)
                series_rows.append(
                    pd.DataFrame(
                        dict(
                            searcher=name,
                            trial=trial,
                            round=idx,
                            cum_violations=viol[idx],
                            cum_signed_diff=diff[idx],
                        )
                    )
                )
        _write_csv(pd.concat(series_rows), out / "threshold_series.csv", "threshold-series")
        _write_csv(per_trial, out / "threshold_trials.csv", "threshold-trials")
        _write_csv(summary, out / "threshold_summary.csv", "threshold-summary")

    return ThresholdExperimentResult(config=config, runs=runs, per_trial=per_trial, summary=summary)


def empirical_summary(per_trial: pd.DataFrame, group: str, metrics) -> pd.DataFrame:
    stats = per_trial.groupby(group)[list(metrics)].agg(["mean", "std"])
    stats.columns = [f"{m}_{s}" for m, s in stats.columns]
    return stats.reset_index()


# ---------------------------------------------------------------------------
# handover experiment
# ---------------------------------------------------------------------------


def _run_handover_trial(scenario, n_users, base_seed, trial):
    stream = RngStream(base_seed).substream(_TAG_HANDOVER, trial)
    draws = draw_campaign(scenario, n_users, stream.substream(0))
    return {
        policy: run_campaign(policy, scenario, n_users, stream, draws)
        for policy in BENCHMARK_POLICIES
    }


@dataclass
class HandoverExperimentResult:
    config: ExperimentConfig
    trials: list[dict[PolicyKind, CampaignMetrics]]
    success_table: pd.DataFrame
    summary: pd.DataFrame

    def mean_success(self, policy: PolicyKind) -> float:
        col = self.success_table["policy"] == policy.value
        return float(self.success_table.loc[col, "success_rate"].mean())


def run_handover_experiment(config: ExperimentConfig, out_dir=None) -> HandoverExperimentResult:
    """Run the five benchmark policies over paired trials."""
    scenario = config.scenario()
    n_users = config.t
    n_jobs = config.n_jobs or min(config.trials, os.cpu_count() or 1)
    args = [(scenario, n_users, config.base_seed, t) for t in range(config.trials)]
    if n_jobs > 1 and config.trials > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            trial_metrics = list(pool.map(_run_handover_trial_star, args))
    else:
        trial_metrics = [_run_handover_trial(*a) for a in args]

    rows = []
    for trial, metrics in enumerate(trial_metrics):
        for policy in BENCHMARK_POLICIES:
            m = metrics[policy]
            rows.append(
                dict(
                    trial=trial,
                    policy=policy.value,
                    success_rate=m.success_rate,
                    mean_measurements=float(m.n_measurements.mean()),
                    mean_free_measurements=float(m.free_measurements.mean()),
                    final_cum_regret=float(
                        metrics[PolicyKind.ORACLE].cum_successes[-1] - m.cum_successes[-1]
                    ),
                )
            )
    success_table = pd.DataFrame(rows)
    summary = empirical_summary(
        success_table,
        group="policy",
        metrics=("success_rate", "mean_measurements", "mean_free_measurements", "final_cum_regret"),
    )

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        config.save(out / "config.yaml")
        if config.data["run"]["write_per_user"]:
            path = out / "handover_users.csv"
            first = True
            for trial, metrics in enumerate(trial_metrics):
                for policy in BENCHMARK_POLICIES:
                    m = metrics[policy]
                    frame = pd.DataFrame(
                        dict(
                            trial=trial,
                            user=np.arange(m.n_users),
                            policy=policy.value,
                            n_meas=m.n_measurements,
                            free_meas=m.free_measurements,
                            y_ho=np.round(m.y_at_handover, 4),
                            x_ho=np.round(m.x_at_handover, 4),
                            success=m.success,
                            cum_success=m.cum_successes,
                        )
                    )
                    _write_csv(frame, path, "handover-users", append=not first)
                    first = False
        regret_rows = []
        for trial, metrics in enumerate(trial_metrics):
            oracle_cum = metrics[PolicyKind.ORACLE].cum_successes
            idx = _series_stride(n_users)
            for policy in BENCHMARK_POLICIES:
                cum = metrics[policy].cum_successes
                regret_rows.append(
                    pd.DataFrame(
                        dict(
                            trial=trial,
                            user=idx,
                            policy=policy.value,
                            cum_regret=(oracle_cum - cum)[idx],
                        )
                    )
                )
        _write_csv(pd.concat(regret_rows), out / "handover_regret.csv", "handover-regret")
        _write_csv(success_table, out / "handover_trials.csv", "handover-trials")
        _write_csv(summary, out / "handover_summary.csv", "handover-summary")

    return HandoverExperimentResult(
        config=config, trials=trial_metrics, success_table=success_table, summary=summary
    )


def _run_handover_trial_star(args):
    return _run_handover_trial(*args)


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------


@dataclass
class SweepResult:
    config: ExperimentConfig
    points: pd.DataFrame


def run_sweep(config: ExperimentConfig, out_dir=None) -> SweepResult:
    """Cartesian sweep over dotted config keys; one summary row per point."""
    sweep = config.data["sweep"]
    inner = sweep["experiment"]
    params = sweep["parameters"]
    if not params:
        raise ConfigError("sweep.parameters: empty sweep")
    keys = [p["key"] for p in params]
    rows = []
    for combo in itertools.product(*[p["values"] for p in params]):
        overrides = dict(zip(keys, combo))
        point_cfg = config.with_overrides({**overrides, "experiment": inner})
        row = {k: v for k, v in overrides.items()}
        if inner == "threshold":
            res = run_threshold_experiment(point_cfg, out_dir=None)
            agg = res.per_trial.groupby("searcher").mean(numeric_only=True)
            for name in SEARCHER_NAMES:
                row[f"{name}_violations"] = float(agg.loc[name, "violations"])
                row[f"{name}_coarse_regret"] = float(agg.loc[name, "coarse_regret"])
                row[f"{name}_abs_cum_diff"] = float(agg.loc[name, "abs_cum_signed_diff"])
        else:
            res = run_handover_experiment(point_cfg, out_dir=None)
            agg = res.success_table.groupby("policy").mean(numeric_only=True)
            for policy in BENCHMARK_POLICIES:
                row[f"{policy.value}_success"] = float(agg.loc[policy.value, "success_rate"])
            row["opportunistic_ts_free_meas"] = float(
                agg.loc[PolicyKind.OPPORTUNISTIC_TS.value, "mean_free_measurements"]
            )
        rows.append(row)
    points = pd.DataFrame(rows)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        config.save(out / "config.yaml")
        _write_csv(points, out / "sweep_summary.csv", "sweep-summary")
    return SweepResult(config=config, points=points)
