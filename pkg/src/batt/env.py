"""Synthetic handover environment.

Houses the monotone signal-to-failure curve, the discrete serving-cell
signal grid used by the threshold search, the serving-signal trajectory
process, and the bank of Bernoulli neighbor (target) cells. Everything is
an immutable value; all randomness comes in through an explicit stream.

Signals are dBm scalars (more negative = weaker). One curve plays both
roles: failure probability as a function of the serving signal at handover
time, and as a function of the chosen target's signal.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation
from .rng import as_generator

__all__ = [
    "FailureCurve",
    "ThresholdGrid",
    "ServingTraceParams",
    "NeighborCellSet",
    "curve_eval",
    "pull_threshold_arm",
    "gen_serving_trace",
    "gen_serving_traces",
    "sample_neighbor_signal",
    "sample_neighbor_signals",
    "draw_handover_outcome",
]


@dataclass(frozen=True)
class FailureCurve:
    """Piecewise-linear, nonincreasing map from signal (dBm) to failure probability.

    Evaluation clamps to the first/last knot value outside the knot range.
    """

    signals: np.ndarray
    failure_probs: np.ndarray

    def __init__(self, knots):
        xs = np.asarray([float(k[0]) for k in knots])
        ys = np.asarray([float(k[1]) for k in knots])
        if xs.size < 2:
            raise ValueError("FailureCurve needs at least 2 knots")
        if not np.all(np.diff(xs) > 0):
            raise ValueError("knot signals must be strictly increasing")
        if np.any(ys < 0) or np.any(ys > 1):
            raise ValueError("failure probabilities must lie in [0, 1]")
        if np.any(np.diff(ys) > 0):
            raise ValueError("failure probabilities must be nonincreasing in signal")
        object.__setattr__(self, "signals", xs)
        object.__setattr__(self, "failure_probs", ys)

    def __call__(self, signal):
        return curve_eval(self, signal)

    def knots(self) -> list[tuple[float, float]]:
        return [(float(x), float(y)) for x, y in zip(self.signals, self.failure_probs)]


def curve_eval(curve: FailureCurve, signal):
    """Interpolated failure probability at ``signal`` (scalar or array)."""
    out = np.interp(signal, curve.signals, curve.failure_probs)
    if np.ndim(signal) == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class ThresholdGrid:
    """Ordered serving-signal levels with their true handover success rates.

    Levels are strictly increasing; success probabilities are nondecreasing
    (stronger serving signal never hurts). Arm indices are 0-based.
    """

    levels: np.ndarray
    success_probs: np.ndarray

    def __init__(self, levels, success_probs):
        lv = np.asarray(levels, dtype=float)
        pr = np.asarray(success_probs, dtype=float)
        if lv.size < 1 or lv.size != pr.size:
            raise ValueError("levels and success_probs must be nonempty and equal length")
        if not np.all(np.diff(lv) > 0):
            raise ValueError("levels must be strictly increasing")
        if np.any(pr < 0) or np.any(pr > 1):
            raise ValueError("success probabilities must lie in [0, 1]")
        if np.any(np.diff(pr) < 0):
            raise ValueError("success probabilities must be nondecreasing")
        object.__setattr__(self, "levels", lv)
        object.__setattr__(self, "success_probs", pr)

    @property
    def n_arms(self) -> int:
        return self.levels.size

    @classmethod
    def from_curve(cls, curve: FailureCurve, levels) -> "ThresholdGrid":
        """Grid whose success rates are read off a failure curve."""
        lv = np.asarray(levels, dtype=float)
        return cls(lv, 1.0 - curve_eval(curve, lv))

    @classmethod
    def linspace_from_curve(cls, curve: FailureCurve, j: int, z_min: float, z_max: float):
        return cls.from_curve(curve, np.linspace(z_min, z_max, j))


def pull_threshold_arm(grid: ThresholdGrid, j: int, rng) -> int:
    """One Bernoulli handover attempt at grid level ``j`` (1 = success)."""
    if not 0 <= j < grid.n_arms:
        raise ContractViolation(f"arm index {j} outside grid of size {grid.n_arms}")
    return int(as_generator(rng).random() < grid.success_probs[j])


@dataclass(frozen=True)
class ServingTraceParams:
    """Linear-drift serving-signal process with bounded uniform noise.

    Each step moves down by ``drift_per_step`` plus uniform noise on
    [-noise_half_width, +noise_half_width]; requiring
    drift + noise_half_width < c makes every consecutive difference
    strictly smaller than the regularity constant ``c``. ``y_start_half_width``
    jitters the entry signal uniformly per trace so users trigger their
    measurement episodes at varied depths.
    """

    y_start: float
    drift_per_step: float
    noise_half_width: float
    c: float
    max_steps: int
    y_start_half_width: float = 0.0

    def __post_init__(self):
        if self.drift_per_step < 0 or self.noise_half_width < 0:
            raise ValueError("drift and noise half-width must be nonnegative")
        if self.c <= 0:
            raise ValueError("regularity constant c must be positive")
        if self.drift_per_step + self.noise_half_width >= self.c:
            raise ValueError("drift_per_step + noise_half_width must be < c")
        if self.max_steps < 1:
            raise ValueError("max_steps must be positive")
        if self.y_start_half_width < 0:
            raise ValueError("y_start_half_width must be nonnegative")


def gen_serving_trace(params: ServingTraceParams, rng) -> np.ndarray:
    """One serving-signal trajectory of length ``max_steps``."""
    return gen_serving_traces(params, 1, rng)[0]


def gen_serving_traces(params: ServingTraceParams, n: int, rng) -> np.ndarray:
    """``n`` trajectories as an (n, max_steps) array, one vectorized draw."""
    gen = as_generator(rng)
    starts = np.full(n, params.y_start)
    if params.y_start_half_width > 0:
        starts = starts + gen.uniform(
            -params.y_start_half_width, params.y_start_half_width, size=n
        )
    hw = params.noise_half_width
    steps = np.full((n, params.max_steps - 1), params.drift_per_step)
    if hw > 0:
        steps = steps + gen.uniform(-hw, hw, size=steps.shape)
    traces = np.empty((n, params.max_steps))
    traces[:, 0] = starts
    np.cumsum(-steps, axis=1, out=steps)
    traces[:, 1:] = starts[:, None] + steps
    return traces


@dataclass(frozen=True)
class NeighborCellSet:
    """K candidate target cells with uniform signal distributions.

    ``true_success_rates`` is the handover success probability at each
    cell's mean signal under the environment curve; it is what an oracle
    ordering policy is allowed to know.
    """

    signal_means: np.ndarray
    signal_half_widths: np.ndarray
    true_success_rates: np.ndarray

    def __init__(self, signal_means, signal_half_widths, true_success_rates):
        m = np.asarray(signal_means, dtype=float)
        h = np.asarray(signal_half_widths, dtype=float)
        r = np.asarray(true_success_rates, dtype=float)
        if m.size < 1 or m.size != h.size or m.size != r.size:
            raise ValueError("cell arrays must be nonempty and of equal length")
        if np.any(h < 0):
            raise ValueError("signal half-widths must be nonnegative")
        if np.any(r < 0) or np.any(r > 1):
            raise ValueError("true_success_rates must lie in [0, 1]")
        object.__setattr__(self, "signal_means", m)
        object.__setattr__(self, "signal_half_widths", h)
        object.__setattr__(self, "true_success_rates", r)

    @property
    def n_cells(self) -> int:
        return self.signal_means.size

    @classmethod
    def calibrated(cls, curve: FailureCurve, signal_means, signal_half_widths):
        """Cells whose success rates are read off the curve at their means."""
        m = np.asarray(signal_means, dtype=float)
        return cls(m, signal_half_widths, 1.0 - curve_eval(curve, m))


def sample_neighbor_signal(cells: NeighborCellSet, k: int, rng) -> float:
    """One measured signal for cell ``k``: uniform around its mean."""
    if not 0 <= k < cells.n_cells:
        raise ContractViolation(f"cell index {k} outside set of size {cells.n_cells}")
    gen = as_generator(rng)
    m = cells.signal_means[k]
    h = cells.signal_half_widths[k]
    return float(gen.uniform(m - h, m + h)) if h > 0 else float(m)


def sample_neighbor_signals(cells: NeighborCellSet, n_users: int, rng) -> np.ndarray:
    """(n_users, K) signal draws, one row per user, one column per cell."""
    gen = as_generator(rng)
    m = cells.signal_means
    h = cells.signal_half_widths
    u = gen.uniform(-1.0, 1.0, size=(n_users, cells.n_cells))
    return m[None, :] + u * h[None, :]


def draw_handover_outcome(curve: FailureCurve, y_at_handover: float, x_best: float, rng) -> int:
    """Joint handover outcome: success iff both the serving-side and
    target-side Bernoulli attempts succeed (independent draws)."""
    gen = as_generator(rng)
    u_serving, u_target = gen.random(2)
    p_serving = 1.0 - curve_eval(curve, y_at_handover)
    p_target = 1.0 - curve_eval(curve, x_best)
    return int((u_serving < p_serving) and (u_target < p_target))
