"""Domain descriptions and the observation/transition records environments return."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


class DomainSpec(BaseModel):
    """Static description of one domain at a chosen render scale."""

    model_config = ConfigDict(frozen=True)

    name: str
    state_dim: int = Field(gt=0)
    action_dim: int = Field(gt=0)
    action_low: float = -1.0
    action_high: float = 1.0
    render_size: int = Field(32, ge=16)
    channels: int = Field(1, ge=1)
    episode_length: int = Field(200, gt=0)  # physics substeps
    action_repeat: int = Field(2, gt=0)

    @model_validator(mode="after")
    def _symmetric_bounds(self) -> DomainSpec:
        if not (np.isfinite(self.action_low) and np.isfinite(self.action_high)):
            raise ValueError("action bounds must be finite")
        if self.action_low != -self.action_high or self.action_high <= 0:
            raise ValueError("action bounds must be symmetric around zero")
        return self

    @property
    def steps_per_episode(self) -> int:
        """Agent decisions per episode."""
        return self.episode_length // self.action_repeat

    @property
    def frame_shape(self) -> tuple[int, int, int]:
        return (self.render_size, self.render_size, self.channels)


@dataclass
class FrameStack:
    """K consecutive frames concatenated on the channel axis: (H, W, K*C), values in [0, 1]."""
    frames: np.ndarray
    timestep: int
    k: int = 3

    @property
    def channels(self) -> int:
        return self.frames.shape[-1] // self.k

    def latest(self) -> np.ndarray:
        """The newest single frame, (H, W, C)."""
        return self.frames[..., -self.channels:]


@dataclass
class Transition:
    state: FrameStack
    action: np.ndarray
    reward: float
    next_state: FrameStack
    terminal: bool = False
    truncated: bool = False
