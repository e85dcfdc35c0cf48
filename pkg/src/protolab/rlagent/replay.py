"""Pixel replay memory for the downstream agent.

Each slot holds the stacked observation, the action, the extrinsic reward, the newest
frame of the next observation and the terminal flag. The next stack is rebuilt from the
current one by dropping its oldest frame, so frames are not stored twice. Every stored
transition gets a monotonically increasing token; the exploration reward uses it to keep
a sample from being its own neighbour.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from protolab.collect.buffer import to_bytes
from protolab.exceptions import InsufficientDataError, ShapeMismatchError


@dataclass
class PixelBatch:
    obs: np.ndarray          # (B, H, W, K*C) float32 in [0, 1]
    action: np.ndarray       # (B, action_dim)
    reward: np.ndarray       # (B,) extrinsic
    next_obs: np.ndarray
    not_done: np.ndarray     # (B,) 0 where the transition ended the episode
    tokens: np.ndarray       # (B,) int64

    def __len__(self) -> int:
        return len(self.reward)


class ReplayBuffer:
    """FIFO ring of pixel transitions with uniform sampling."""

    def __init__(
        self,
        capacity: int,
        obs_shape: tuple[int, int, int],
        action_dim: int,
        channels: int,
    ):
        if capacity <= 0:
            raise ValueError(f"capacity must be positive, got {capacity}")
        if obs_shape[2] % channels:
            raise ShapeMismatchError(
                f"{obs_shape[2]} stacked channels is not a multiple of {channels}"
            )
        self.capacity = capacity
        self.obs_shape = tuple(obs_shape)
        self.channels = channels
        h, w, _ = obs_shape
        self._obs = np.zeros((capacity, *obs_shape), dtype=np.uint8)
        self._next_frame = np.zeros((capacity, h, w, channels), dtype=np.uint8)
        self._action = np.zeros((capacity, action_dim), dtype=np.float64)
        self._reward = np.zeros(capacity, dtype=np.float64)
        self._terminal = np.zeros(capacity, dtype=bool)
        self._tokens = np.zeros(capacity, dtype=np.int64)
        self._cursor = 0
        self._added = 0

    def __len__(self) -> int:
        return min(self._added, self.capacity)

    @property
    def added(self) -> int:
        return self._added

    def add(
        self,
        obs: np.ndarray,
        action: np.ndarray,
        reward: float,
        next_frame: np.ndarray,
        terminal: bool = False,
    ) -> int:
        """Store one transition; returns its token."""
        if obs.shape != self.obs_shape:
            raise ShapeMismatchError(
                f"observation of shape {obs.shape}, buffer holds {self.obs_shape}"
            )
        i = self._cursor
        self._obs[i] = to_bytes(obs)
        self._next_frame[i] = to_bytes(next_frame)
        self._action[i] = action
        self._reward[i] = reward
        self._terminal[i] = terminal
        self._tokens[i] = self._added
        self._cursor = (i + 1) % self.capacity
        self._added += 1
        return int(self._tokens[i])

    def sample(self, batch_size: int, rng: np.random.Generator) -> PixelBatch:
        if len(self) < batch_size:
            raise InsufficientDataError(
                f"replay holds {len(self)} transitions, batch needs {batch_size}"
            )
        idx = rng.integers(0, len(self), size=batch_size)
        obs = self._obs[idx]
        next_obs = np.concatenate([obs[..., self.channels:], self._next_frame[idx]], axis=-1)
        return PixelBatch(
            obs=obs.astype(np.float32) / 255.0,
            action=self._action[idx].copy(),
            reward=self._reward[idx].copy(),
            next_obs=next_obs.astype(np.float32) / 255.0,
            not_done=(~self._terminal[idx]).astype(np.float64),
            tokens=self._tokens[idx].copy(),
        )
