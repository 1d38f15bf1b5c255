import numpy as np
import pytest

from batt.analysis import (
    exploration_tradeoff,
    instance_gaps,
    misidentification_negligible,
    optimal_epsilon,
    regret_bound,
)
from batt.env import ThresholdGrid
from batt.errors import ContractViolation
from batt.oracles import grid_min_epsilon


def test_optimal_epsilon_reference_point():
    # J=81, T=25000, delta=0.05
    assert optimal_epsilon(81, 25000, 0.05) == pytest.approx(0.3110, abs=5e-4)


def test_regret_bound_reference_point():
    assert regret_bound(81, 25000, 0.05) == pytest.approx(8.65e3, rel=1e-3)


def test_bound_increasing_in_t():
    values = [regret_bound(81, t, 0.05) for t in (10_000, 25_000, 100_000, 10**6)]
    assert all(b > a for a, b in zip(values, values[1:]))


def test_closed_form_minimizes_tradeoff_locally():
    for j, t, delta in [(81, 25000, 0.05), (16, 10**4, 0.1), (256, 10**5, 0.2)]:
        eps = optimal_epsilon(j, t, delta)
        h0 = exploration_tradeoff(eps, j, t, delta)
        for d in (-0.01, 0.01):
            probe = eps + d
            if 0 < probe <= 1:
                assert h0 <= exploration_tradeoff(probe, j, t, delta)


def test_closed_form_matches_grid_oracle():
    gen = np.random.default_rng(42)
    for _ in range(20):
        j = int(gen.integers(4, 513))
        t = int(gen.integers(1_000, 1_000_001))
        delta = float(gen.uniform(0.01, 0.3))
        assert optimal_epsilon(j, t, delta) == pytest.approx(
            grid_min_epsilon(j, t, delta), abs=1e-4
        )


def test_large_delta_small_epsilon_scale():
    # with easy instances the budget shrinks toward the ln(J)/T scale
    eps = optimal_epsilon(4, 10**6, 0.5)
    assert eps < 50 * np.log(4) / 10**6


def test_clamp_boundary_consistent_with_oracle():
    # degenerate tiny horizon: both implementations hit the upper clamp
    j, t, delta = 81, 81, 0.05
    assert optimal_epsilon(j, t, delta) == 1.0
    assert grid_min_epsilon(j, t, delta) == 1.0


def test_domain_contracts():
    with pytest.raises(ContractViolation):
        optimal_epsilon(81, 25000, 0.0)
    with pytest.raises(ContractViolation):
        optimal_epsilon(1, 25000, 0.1)
    with pytest.raises(ContractViolation):
        regret_bound(2, 1, 0.001)  # 6 delta^2 T J <= 1


def test_instance_gaps_quantities():
    grid = ThresholdGrid([-120.0, -110.0, -100.0], [0.5, 0.8, 0.95])
    params = instance_gaps(grid, 0.7)
    assert params.Delta == pytest.approx(0.1)
    assert params.D == pytest.approx(0.15)
    assert params.d == pytest.approx(0.1)
    assert params.delta == pytest.approx(0.075)


def test_misidentification_condition_direction():
    # more pulls make the search sharper: the predicate flips from False
    # to True as P grows for a fixed gap
    assert not misidentification_negligible(0.05, 16, 10**4, 10)
    assert misidentification_negligible(0.05, 16, 10**4, 5000)
