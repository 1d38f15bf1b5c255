import numpy as np
import pytest

from batt.config import default_config
from batt.episodes import EpisodeDraws


@pytest.fixture(scope="session")
def cfg():
    return default_config()


def make_draws(
    y_trace,
    x_signals,
    f_success=None,
    g_success=None,
    reward_bits=None,
    u_serving=0.5,
    u_target=0.5,
):
    """Hand-built episode randomness for branch-level tests."""
    y = np.asarray(y_trace, dtype=float)
    x = np.asarray(x_signals, dtype=float)
    return EpisodeDraws(
        y_trace=y,
        x_signals=x,
        reward_bits=np.ones(x.size) if reward_bits is None else np.asarray(reward_bits, float),
        f_success=np.ones(y.size) if f_success is None else np.asarray(f_success, float),
        g_success=np.ones(x.size) if g_success is None else np.asarray(g_success, float),
        u_serving=u_serving,
        u_target=u_target,
    )
