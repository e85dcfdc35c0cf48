"""Pixel replay ring."""

from __future__ import annotations

import numpy as np
import pytest

from protolab.exceptions import InsufficientDataError, ShapeMismatchError
from protolab.rlagent import ReplayBuffer

OBS_SHAPE = (4, 4, 3)


def _fill(replay: ReplayBuffer, n: int) -> list[int]:
    tokens = []
    for i in range(n):
        obs = np.full(OBS_SHAPE, 0.2)
        tokens.append(replay.add(obs, np.array([0.1 * i]), float(i), np.full((4, 4, 1), 0.6)))
    return tokens


def test_tokens_increase() -> None:
    replay = ReplayBuffer(8, OBS_SHAPE, 1, 1)
    assert _fill(replay, 3) == [0, 1, 2]
    assert replay.added == 3 and len(replay) == 3


def test_fifo_at_capacity(rng: np.random.Generator) -> None:
    replay = ReplayBuffer(3, OBS_SHAPE, 1, 1)
    _fill(replay, 5)
    assert len(replay) == 3 and replay.added == 5
    batch = replay.sample(64, rng)
    assert set(batch.reward.tolist()) <= {2.0, 3.0, 4.0}
    assert set(batch.tokens.tolist()) <= {2, 3, 4}
    np.testing.assert_allclose(batch.action[:, 0], 0.1 * batch.reward)


def test_sample_rebuilds_next_stack(rng: np.random.Generator) -> None:
    replay = ReplayBuffer(4, OBS_SHAPE, 1, 1)
    _fill(replay, 2)
    batch = replay.sample(5, rng)
    assert len(batch) == 5
    assert batch.obs.shape == batch.next_obs.shape == (5, *OBS_SHAPE)
    assert batch.obs.dtype == np.float32
    np.testing.assert_allclose(batch.obs, 0.2, atol=1e-6)
    np.testing.assert_allclose(batch.next_obs[..., :2], 0.2, atol=1e-6)
    np.testing.assert_allclose(batch.next_obs[..., 2], 0.6, atol=1e-6)
    np.testing.assert_array_equal(batch.not_done, np.ones(5))


def test_terminal_flag(rng: np.random.Generator) -> None:
    replay = ReplayBuffer(2, OBS_SHAPE, 1, 1)
    replay.add(np.zeros(OBS_SHAPE), np.zeros(1), 0.0, np.zeros((4, 4, 1)), terminal=True)
    np.testing.assert_array_equal(replay.sample(3, rng).not_done, np.zeros(3))


def test_uniform_sampling() -> None:
    replay = ReplayBuffer(4, OBS_SHAPE, 1, 1)
    _fill(replay, 4)
    counts = np.bincount(replay.sample(40_000, np.random.default_rng(0)).tokens, minlength=4)
    np.testing.assert_allclose(counts / 40_000, 0.25, atol=0.01)


def test_not_enough_transitions(rng: np.random.Generator) -> None:
    replay = ReplayBuffer(4, OBS_SHAPE, 1, 1)
    _fill(replay, 1)
    with pytest.raises(InsufficientDataError):
        replay.sample(2, rng)


def test_shapes_checked() -> None:
    with pytest.raises(ShapeMismatchError):
        ReplayBuffer(4, (4, 4, 4), 1, 3)
    replay = ReplayBuffer(4, OBS_SHAPE, 1, 1)
    with pytest.raises(ShapeMismatchError):
        replay.add(np.zeros((4, 4, 2)), np.zeros(1), 0.0, np.zeros((4, 4, 1)))
