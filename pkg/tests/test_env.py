import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from batt.env import (
    FailureCurve,
    NeighborCellSet,
    ServingTraceParams,
    ThresholdGrid,
    curve_eval,
    draw_handover_outcome,
    gen_serving_trace,
    gen_serving_traces,
    pull_threshold_arm,
    sample_neighbor_signal,
    sample_neighbor_signals,
)
from batt.errors import ContractViolation
from batt.rng import RngStream

TWO_KNOTS = FailureCurve([(-140.0, 0.60), (-120.0, 0.10)])


def test_curve_midpoint_interpolation():
    assert curve_eval(TWO_KNOTS, -130.0) == pytest.approx(0.35)


def test_curve_exact_knot():
    assert curve_eval(TWO_KNOTS, -120.0) == pytest.approx(0.10)


def test_curve_clamps_outside_range():
    assert curve_eval(TWO_KNOTS, -50.0) == pytest.approx(0.10)
    assert curve_eval(TWO_KNOTS, -150.0) == pytest.approx(0.60)


@given(
    st.lists(st.tuples(st.floats(-140, -60), st.floats(0, 1)), min_size=2, max_size=8),
    st.floats(-150, -50),
    st.floats(-150, -50),
)
def test_curve_monotone_everywhere(raw_knots, s1, s2):
    xs = sorted({round(x, 3) for x, _ in raw_knots})
    if len(xs) < 2:
        return
    ys = sorted((round(y, 3) for _, y in raw_knots[: len(xs)]), reverse=True)
    curve = FailureCurve(list(zip(xs, ys)))
    lo, hi = min(s1, s2), max(s1, s2)
    assert curve_eval(curve, lo) >= curve_eval(curve, hi)


def test_curve_rejects_non_monotone():
    with pytest.raises(ValueError):
        FailureCurve([(-140.0, 0.1), (-120.0, 0.2)])
    with pytest.raises(ValueError):
        FailureCurve([(-120.0, 0.1), (-120.0, 0.1)])


def test_grid_from_curve_is_nondecreasing(cfg):
    grid = ThresholdGrid.from_curve(cfg.curve(), np.linspace(-140, -60, 81))
    assert np.all(np.diff(grid.success_probs) >= 0)


def test_degenerate_arms():
    grid = ThresholdGrid([-120.0, -100.0], [0.0, 1.0])
    gen = RngStream(0).generator()
    assert all(pull_threshold_arm(grid, 1, gen) == 1 for _ in range(20))
    assert all(pull_threshold_arm(grid, 0, gen) == 0 for _ in range(20))


def test_arm_monte_carlo_mean():
    grid = ThresholdGrid([-100.0], [0.9])
    gen = RngStream(5).generator()
    draws = np.array([pull_threshold_arm(grid, 0, gen) for _ in range(100_000)])
    assert abs(draws.mean() - 0.9) < 0.005


def test_arm_index_contract():
    grid = ThresholdGrid([-100.0], [0.9])
    with pytest.raises(ContractViolation):
        pull_threshold_arm(grid, 1, RngStream(0))


def test_deterministic_drift_trace():
    params = ServingTraceParams(
        y_start=-116.0, drift_per_step=1.0, noise_half_width=0.0, c=4.0, max_steps=3
    )
    np.testing.assert_allclose(
        gen_serving_trace(params, RngStream(1)), [-116.0, -117.0, -118.0]
    )


def test_constant_trace():
    params = ServingTraceParams(
        y_start=-110.0, drift_per_step=0.0, noise_half_width=0.0, c=1.0, max_steps=5
    )
    np.testing.assert_allclose(gen_serving_trace(params, RngStream(1)), np.full(5, -110.0))


def test_regularity_bound_many_traces():
    params = ServingTraceParams(
        y_start=-112.0, drift_per_step=2.0, noise_half_width=1.5, c=4.0, max_steps=12
    )
    traces = gen_serving_traces(params, 100_000, RngStream(3))
    steps = np.abs(np.diff(traces, axis=1))
    assert steps.max() < 4.0


@settings(max_examples=50)
@given(
    st.floats(0.0, 3.0),
    st.floats(0.0, 2.0),
    st.integers(2, 10),
    st.integers(0, 2**32 - 1),
)
def test_regularity_bound_property(drift, noise, steps, seed):
    c = drift + noise + 0.5
    params = ServingTraceParams(
        y_start=-110.0, drift_per_step=drift, noise_half_width=noise, c=c, max_steps=steps
    )
    trace = gen_serving_trace(params, RngStream(seed))
    assert np.abs(np.diff(trace)).max() < c


def test_trace_params_invariant():
    with pytest.raises(ValueError):
        ServingTraceParams(-110.0, 3.0, 1.0, 4.0, 5)


def test_neighbor_degenerate_signal():
    cells = NeighborCellSet([-110.0], [0.0], [0.5])
    assert sample_neighbor_signal(cells, 0, RngStream(2)) == -110.0


def test_neighbor_signal_statistics():
    cells = NeighborCellSet([-110.0], [5.0], [0.5])
    draws = sample_neighbor_signals(cells, 100_000, RngStream(4))[:, 0]
    assert abs(draws.mean() + 110.0) < 0.05
    assert draws.min() >= -115.0 and draws.max() <= -105.0


def test_neighbor_index_contract():
    cells = NeighborCellSet([-110.0], [1.0], [0.5])
    with pytest.raises(ContractViolation):
        sample_neighbor_signal(cells, 1, RngStream(0))


def test_outcome_degenerate_curves():
    always_fail = FailureCurve([(-140.0, 1.0), (-60.0, 1.0)])
    never_fail = FailureCurve([(-140.0, 0.0), (-60.0, 0.0)])
    gen = RngStream(6).generator()
    assert all(draw_handover_outcome(never_fail, -100, -100, gen) == 1 for _ in range(20))
    assert all(draw_handover_outcome(always_fail, -100, -100, gen) == 0 for _ in range(20))


def test_outcome_product_of_bernoullis():
    # both sides succeed with 0.9 -> joint success 0.81
    curve = FailureCurve([(-140.0, 0.1), (-60.0, 0.1)])
    gen = RngStream(7).generator()
    draws = np.array([draw_handover_outcome(curve, -100, -90, gen) for _ in range(100_000)])
    assert abs(draws.mean() - 0.81) < 0.01


def test_default_cells_reproduce_reward_vector(cfg):
    cells = cfg.cells()
    expected = [0.76, 0.88, 0.90, 0.91, 0.92, 0.93, 0.94, 0.95, 0.97]
    np.testing.assert_allclose(cells.true_success_rates, expected, atol=1e-12)
    # round trip: the curve evaluated at the means gives back the rates
    curve = cfg.curve()
    np.testing.assert_allclose(
        1.0 - curve_eval(curve, cells.signal_means), expected, atol=1e-12
    )
