#!/usr/bin/env python3
"""Calibration sweep for the default handover environment.

Reports, per candidate geometry: baseline success (target 89.7 +- 1),
the opportunistic-vs-classic-TS/UCB margin, oracle headroom, and the
threshold-experiment margins under the same curve. Used to pick the
numbers frozen into src/batt/data/default.yaml.
"""

import copy
import sys
import time

import numpy as np

sys.path.insert(0, "src")

from batt import RngStream
from batt.campaign import BENCHMARK_POLICIES, draw_campaign, run_campaign
from batt.config import ExperimentConfig, default_config
from batt.episodes import PolicyKind
from batt.threshold import ArmPullSource, eps_binary_search_first, uniform_search_first

LADDERS = {
    # rung failure values at -121..-126, then deep anchors
    "gentle": [0.055, 0.065, 0.075, 0.085, 0.095, 0.105, (-127.0, 0.12), (-133.0, 0.24)],
    "mid": [0.055, 0.075, 0.10, 0.13, 0.165, 0.20, (-130.0, 0.28), (-135.0, 0.40)],
    "steep": [0.06, 0.09, 0.13, 0.18, 0.24, 0.30, (-130.0, 0.42), (-135.0, 0.50)],
}
RATES = [0.76, 0.88, 0.90, 0.91, 0.92, 0.93, 0.94, 0.95, 0.97]


def build_curve_and_cells(ladder_name, m9=-113.0):
    shape = LADDERS[ladder_name]
    rungs = [(-121.0 - i, v) for i, v in enumerate(shape[:6])]
    deep = list(shape[6:])
    knots = [(-140.0, 0.55)] + sorted(deep) + sorted(rungs) + [
        (-120.0, 0.03),
        (-110.0, 0.03),
        (-100.0, 0.015),
        (-60.0, 0.005),
    ]
    knots = sorted(set(knots))
    xs = np.array([k[0] for k in knots])
    ys = np.array([k[1] for k in knots])
    # cell means: where the curve hits each required failure value
    fails = [1.0 - r for r in RATES]
    means = []
    for f in fails[:-1]:
        means.append(float(np.interp(f, ys[::-1], xs[::-1])))
    means.append(m9)
    return [list(k) for k in knots], means


def probe(data, trials=3, T=100_000, label=""):
    cfg = ExperimentConfig.from_dict(data)
    sc = cfg.scenario()
    per = {p.value: [] for p in BENCHMARK_POLICIES}
    t0 = time.time()
    for trial in range(trials):
        stream = RngStream(cfg.base_seed).substream(1, trial)
        draws = draw_campaign(sc, T, stream.substream(0))
        for p in BENCHMARK_POLICIES:
            per[p.value].append(run_campaign(p, sc, T, stream, draws).success_rate)
    means = {k: float(np.mean(v)) for k, v in per.items()}
    gap = means["opportunistic_ts"] - max(means["classic_ts"], means["classic_ucb"])
    per_trial_gap = [
        per["opportunistic_ts"][i] - max(per["classic_ts"][i], per["classic_ucb"][i])
        for i in range(trials)
    ]
    base_fail = 1 - means["baseline"]
    ots_fail = 1 - means["opportunistic_ts"]
    rel_red = (base_fail - ots_fail) / base_fail
    print(
        f"{label:32s} base={means['baseline']:.4f} ots={means['opportunistic_ts']:.4f} "
        f"ts={means['classic_ts']:.4f} ucb={means['classic_ucb']:.4f} or={means['oracle']:.4f} "
        f"gap={gap:+.5f} (trials: {['%+.5f' % g for g in per_trial_gap]}) rel_red={rel_red:.1%} "
        f"[{time.time() - t0:.0f}s]"
    )
    return means, gap


def threshold_margins(data, trials=10):
    cfg = ExperimentConfig.from_dict(data)
    grid = cfg.grid()
    scfg = cfg.search_config()
    b_viol, u_viol, b_diff, u_diff, b_exploit_viol = [], [], [], [], []
    for trial in range(trials):
        st = RngStream(cfg.base_seed).substream(0, trial)
        b = eps_binary_search_first(scfg, grid, source=ArmPullSource(grid, st))
        u = uniform_search_first(scfg, grid, source=ArmPullSource(grid, st))
        b_viol.append(b.violations)
        u_viol.append(u.violations)
        b_diff.append(abs(b.cum_signed_diff))
        u_diff.append(abs(u.cum_signed_diff))
        exploit = grid.success_probs[b.round_arms[b.explore_rounds:]] < scfg.R
        b_exploit_viol.append(int(exploit.sum()))
    print(
        f"  threshold: bsf_viol={np.mean(b_viol):.0f} uni_viol={np.mean(u_viol):.0f} "
        f"bsf_|diff|={np.mean(b_diff):.0f} uni_|diff|={np.mean(u_diff):.0f} "
        f"bsf_exploit_viol={b_exploit_viol}"
    )


def main():
    base = default_config().to_dict()
    candidates = []
    for ladder in ("gentle", "mid", "steep"):
        for drift in (1.75, 2.0):
            d = copy.deepcopy(base)
            knots, means = build_curve_and_cells(ladder)
            d["env"]["curve_knots"] = knots
            d["env"]["cells"]["signal_means"] = means
            d["env"]["serving"]["drift_per_step"] = drift
            candidates.append((f"{ladder}/drift{drift}", d))
    for label, d in candidates:
        probe(d, trials=3, label=label)
    print()
    for ladder in ("gentle", "mid", "steep"):
        d = copy.deepcopy(base)
        knots, means = build_curve_and_cells(ladder)
        d["env"]["curve_knots"] = knots
        d["env"]["cells"]["signal_means"] = means
        print(ladder)
        threshold_margins(d)


if __name__ == "__main__":
    main()
