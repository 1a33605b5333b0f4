"""Shared fixtures: the four-channel demo ensemble and small helpers."""

import numpy as np
import pytest

from mmse_bounds import ChannelEnsemble, DivergenceBall, GaussianReference

# Four correlated 3x3 noise covariances with fixed positive weights; the
# same ensemble the bundled example config and reference curves use.
DEMO_NOISE = [
    [[3.0405, -2.1179, 2.1107],
     [-2.1179, 4.1238, -1.3414],
     [2.1107, -1.3414, 4.8199]],
    [[0.9221, 1.2047, 0.5731],
     [1.2047, 2.3851, -0.2188],
     [0.5731, -0.2188, 1.5767]],
    [[9.9708, 0.7749, -2.4323],
     [0.7749, 0.9252, -2.3907],
     [-2.4323, -2.3907, 6.3022]],
    [[1.2353, -1.1973, -1.1141],
     [-1.1973, 4.2225, 1.0695],
     [-1.1141, 1.0695, 1.6102]],
]
DEMO_WEIGHTS = [0.3565, 0.0732, 0.5910, 0.9102]

TEST_SEED = 20240905


@pytest.fixture(scope="session")
def demo_ensemble() -> ChannelEnsemble:
    return ChannelEnsemble.from_arrays(
        [np.array(m, dtype=float) for m in DEMO_NOISE], DEMO_WEIGHTS)


def isotropic_ball(k: int, variance: float, epsilon: float) -> DivergenceBall:
    """Zero-mean isotropic reference N(0, variance*I_k) with radius epsilon."""
    return DivergenceBall(GaussianReference(np.zeros(k), variance * np.eye(k)),
                          epsilon)


def random_spd(rng: np.random.Generator, k: int, scale: float = 1.0) -> np.ndarray:
    """Well-conditioned random SPD matrix with trace about k*scale."""
    a = rng.normal(size=(k, k))
    m = a @ a.T + k * np.eye(k)
    return scale * k * m / np.trace(m)
