import math

import numpy as np
import pytest

from batt.env import FailureCurve, NeighborCellSet, ServingTraceParams
from batt.episodes import (
    Action,
    PolicyKind,
    draw_episode,
    opportunistic_action,
    opportunistic_ts_budget1,
    run_episode_baseline,
    run_episode_opportunistic,
    select_next_cell,
)
from batt.errors import ContractViolation
from batt.learners import LearnerState
from batt.rng import RngStream
from conftest import make_draws

M_HAT, C = -120.0, 4.0


def test_branch_free_measurement():
    # best target already sufficient and serving still comfortably strong
    assert opportunistic_action(-110.0, -115.0, M_HAT, C) is Action.FREE_MEASURE


def test_branch_handover_when_margin_gone():
    assert opportunistic_action(-110.0, -119.0, M_HAT, C) is Action.HANDOVER


def test_branch_late_handover_to_insufficient_best():
    assert opportunistic_action(-122.0, -125.0, M_HAT, C) is Action.HANDOVER


def test_branch_measure_while_serving_beats_best():
    assert opportunistic_action(-122.0, -118.0, M_HAT, C) is Action.MEASURE


def test_sentinels_force_first_measurement():
    assert opportunistic_action(-math.inf, math.inf, M_HAT, C) is Action.MEASURE


def test_oracle_selection_order():
    rates = np.array([0.76, 0.97, 0.90])
    measured = np.zeros(3, dtype=bool)
    gen = RngStream(0).generator()
    first = select_next_cell(PolicyKind.ORACLE, None, measured, gen, true_rates=rates)
    assert first == 1
    measured[first] = True
    second = select_next_cell(PolicyKind.ORACLE, None, measured, gen, true_rates=rates)
    assert second == 2


def test_ts_selection_concentrates():
    learner = LearnerState(3)
    learner.alphas[:] = [1e6, 1.0, 1.0]
    learner.betas[:] = [1.0, 1e6, 1e6]
    measured = np.zeros(3, dtype=bool)
    picks = [
        select_next_cell(PolicyKind.CLASSIC_TS, learner, measured, RngStream(seed))
        for seed in range(1000)
    ]
    assert picks.count(0) == 1000


def test_selection_requires_unmeasured():
    with pytest.raises(ContractViolation):
        select_next_cell(PolicyKind.BASELINE, None, np.ones(2, dtype=bool), RngStream(0))


def test_opportunistic_free_then_handover_path():
    # strong target found at once; two free measurements while y >= -116,
    # handover as soon as the margin disappears
    learner = LearnerState(4)
    learner.alphas[:] = [1e9, 1.0, 1.0, 1.0]
    learner.betas[:] = [1.0, 1e9, 1e9, 1e9]
    draws = make_draws(
        y_trace=[-112.0, -114.0, -117.0, -119.0],
        x_signals=[-113.0, -126.0, -127.0, -128.0],
    )
    log = []
    res = run_episode_opportunistic(
        draws, learner, RngStream(1), M_HAT, C, step_log=log
    )
    assert [a for a, _, _ in log] == [Action.MEASURE, Action.FREE_MEASURE, Action.FREE_MEASURE, Action.HANDOVER]
    assert res.free_measurements == 2
    assert res.n_measurements == 3
    assert res.y_at_handover == -117.0
    assert res.x_at_handover == -113.0
    assert res.handover_target == 0


def test_opportunistic_rides_then_hands_over_late():
    # nothing sufficient: measures while y > x_best, hands over at crossing
    learner = LearnerState(2)
    draws = make_draws(
        y_trace=[-118.0, -124.5],
        x_signals=[-123.0, -124.0],
    )
    res = run_episode_opportunistic(draws, learner, RngStream(2), M_HAT, C)
    assert res.n_measurements == 2
    assert res.x_at_handover == -123.0
    assert res.y_at_handover == -124.5
    assert res.free_measurements == 0


def test_free_observation_guard_invariant():
    cells = NeighborCellSet.calibrated(
        FailureCurve([(-140.0, 0.5), (-120.0, 0.03), (-60.0, 0.01)]),
        [-125.0, -121.0, -113.0],
        [1.5, 1.5, 1.0],
    )
    serving = ServingTraceParams(-114.0, 1.5, 1.0, 4.0, 6, y_start_half_width=2.0)
    curve = FailureCurve([(-140.0, 0.5), (-120.0, 0.03), (-60.0, 0.01)])
    learner = LearnerState(3)
    stream = RngStream(11)
    for i in range(500):
        draws = draw_episode(curve, cells, serving, stream.substream(i))
        log = []
        res = run_episode_opportunistic(
            draws, learner, stream.substream(10_000 + i), M_HAT, C, step_log=log
        )
        for action, x_best, y in log:
            if action is Action.FREE_MEASURE:
                assert x_best >= M_HAT and y >= M_HAT + C
        assert 1 <= res.n_measurements <= 3
        assert res.handover_target >= 0


def test_no_repeat_measurements_and_accounting():
    curve = FailureCurve([(-140.0, 0.5), (-120.0, 0.03), (-60.0, 0.01)])
    cells = NeighborCellSet.calibrated(curve, [-125.0, -122.0, -118.0, -113.0], [1.0] * 4)
    serving = ServingTraceParams(-113.0, 1.5, 1.0, 4.0, 8)
    stream = RngStream(21)
    total_meas = 0
    learner = LearnerState(4)
    for i in range(300):
        before = learner.pull_counts.copy()
        draws = draw_episode(curve, cells, serving, stream.substream(i))
        res = run_episode_opportunistic(
            draws, learner, stream.substream(5_000 + i), M_HAT, C
        )
        delta = learner.pull_counts - before
        assert delta.max() <= 1  # a cell is measured at most once per episode
        assert delta.sum() == res.n_measurements
        total_meas += res.n_measurements
    assert learner.total_updates == total_meas


def test_baseline_immediate_handover():
    draws = make_draws(y_trace=[-118.0, -119.0], x_signals=[-100.0, -130.0])
    learner = LearnerState(2)
    res = run_episode_baseline(
        PolicyKind.CLASSIC_TS, draws, learner, RngStream(3), m_hat=M_HAT
    )
    assert res.n_measurements == 1
    assert res.x_at_handover == -100.0


def test_baseline_exhaustion_forced_handover():
    # every target weaker than the serving signal for the whole trace
    draws = make_draws(y_trace=[-112.0, -113.0, -114.0], x_signals=[-130.0, -131.0, -132.0])
    res = run_episode_baseline(
        PolicyKind.BASELINE, draws, None, RngStream(4), m_hat=M_HAT
    )
    assert res.n_measurements == 3
    assert res.x_at_handover == -130.0
    assert res.y_at_handover == -114.0


def test_baseline_handover_rule_soundness():
    curve = FailureCurve([(-140.0, 0.5), (-120.0, 0.03), (-60.0, 0.01)])
    cells = NeighborCellSet.calibrated(curve, [-124.0, -119.0, -114.0], [2.0] * 3)
    serving = ServingTraceParams(-115.0, 2.0, 1.0, 4.0, 6, y_start_half_width=3.0)
    stream = RngStream(31)
    learner = LearnerState(3)
    for i in range(400):
        draws = draw_episode(curve, cells, serving, stream.substream(i))
        res = run_episode_baseline(
            PolicyKind.CLASSIC_UCB, draws, learner, stream.substream(9_000 + i), m_hat=M_HAT
        )
        assert (res.x_at_handover > res.y_at_handover) or res.n_measurements == 3


def test_budget1_matches_classic_ts_first_choice():
    draws = make_draws(
        y_trace=[-115.0, -116.0, -117.0], x_signals=[-120.0, -118.0, -119.0]
    )
    for seed in range(200):
        l1 = LearnerState(3)
        l2 = LearnerState(3)
        l1.alphas[:] = l2.alphas[:] = [3.0, 5.0, 2.0]
        l1.betas[:] = l2.betas[:] = [4.0, 2.0, 3.0]
        b1 = opportunistic_ts_budget1(draws, l1, RngStream(seed), m_hat=M_HAT)
        expected = select_next_cell(
            PolicyKind.CLASSIC_TS, l2, np.zeros(3, dtype=bool), RngStream(seed)
        )
        assert b1.handover_target == expected
        assert b1.n_measurements == 1
        assert b1.y_at_handover == -115.0


def test_indicator_reward_mode():
    draws = make_draws(
        y_trace=[-115.0], x_signals=[-118.0], reward_bits=[0.0]
    )
    learner = LearnerState(1)
    run_episode_opportunistic(draws, learner, RngStream(5), M_HAT, C, reward_mode="indicator")
    # measured signal -118 >= m_hat -> reward 1 despite reward_bits saying 0
    assert learner.alphas[0] == 2.0
