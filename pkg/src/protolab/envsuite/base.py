"""Shared environment machinery: seeding, action checks, integration, frame stacking.

Concrete domains provide the physics (``_accelerations``), the reward, the ground-truth
vector and a ``_draw`` method. Time integration is the same for all of them: each
physics substep of length ``dt`` is split into ``integrator_substeps`` slices, and every
slice is a symmetric semi-implicit Euler update (half velocity kick, position drift,
half kick).
"""

from __future__ import annotations

import logging
from collections import deque

import numpy as np

from protolab.envsuite.render import Canvas
from protolab.envsuite.spec import DomainSpec, FrameStack, Transition
from protolab.exceptions import NotResetError, OutOfBoundsError, ShapeMismatchError

logger = logging.getLogger(__name__)

ACTION_TOLERANCE = 1e-9


def seed_generator(seed: int) -> np.random.Generator:
    """Generator for any 64-bit integer seed, negative ones included."""
    return np.random.default_rng(np.random.SeedSequence(int(seed) & 0xFFFF_FFFF_FFFF_FFFF))


class Environment:
    """A reward-bearing continuous-control domain with pixel observations."""

    extent: float = 1.2  # half-width of the rendered world window

    def __init__(
        self,
        spec: DomainSpec,
        *,
        dt: float = 0.05,
        integrator_substeps: int = 10,
        frame_stack: int = 3,
    ):
        self.spec = spec
        self.dt = dt
        self.integrator_substeps = integrator_substeps
        self.frame_stack = frame_stack
        self.position = np.zeros(0)
        self.velocity = np.zeros(0)
        self._frames: deque[np.ndarray] = deque(maxlen=frame_stack)
        self._ready = False
        self._elapsed = 0      # physics substeps since reset
        self._timestep = 0     # agent steps since reset
        self._stack: FrameStack | None = None

    # --- domain hooks ----------------------------------------------------

    def _initial_state(self, rng: np.random.Generator) -> None:
        raise NotImplementedError

    def _accelerations(self, action: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _constrain(self) -> None:
        """Enforce walls or rails after each slice."""

    def _reward(self) -> float:
        raise NotImplementedError

    def _ground_truth(self) -> np.ndarray:
        raise NotImplementedError

    def _draw(self, canvas: Canvas) -> None:
        raise NotImplementedError

    # --- public API ------------------------------------------------------

    def reset(self, seed: int) -> FrameStack:
        rng = seed_generator(seed)
        self._initial_state(rng)
        self._elapsed = 0
        self._timestep = 0
        self._ready = True
        first = self.render()
        self._frames.clear()
        for _ in range(self.frame_stack):
            self._frames.append(first)
        self._stack = self._make_stack()
        return self._stack

    def step(self, action: np.ndarray | float) -> Transition:
        if not self._ready or self._stack is None:
            raise NotResetError(f"{self.spec.name}: call reset() before step()")
        action = np.asarray(action, dtype=np.float64).reshape(-1)
        if action.shape != (self.spec.action_dim,):
            raise ShapeMismatchError(
                f"{self.spec.name}: action of shape {action.shape}, want ({self.spec.action_dim},)"
            )
        if not np.isfinite(action).all() or (np.abs(action) > 1.0 + ACTION_TOLERANCE).any():
            raise OutOfBoundsError(f"{self.spec.name}: action {action} outside [-1, 1]")
        action = np.clip(action, -1.0, 1.0)

        reward = 0.0
        for _ in range(self.spec.action_repeat):
            self.physics_substep(action)
            reward += self._reward()
        self._timestep += 1

        previous = self._stack
        self._frames.append(self.render())
        self._stack = self._make_stack()
        truncated = self._elapsed + self.spec.action_repeat > self.spec.episode_length
        if truncated:
            self._ready = False
        return Transition(
            state=previous,
            action=action,
            reward=float(reward),
            next_state=self._stack,
            terminal=False,
            truncated=truncated,
        )

    def physics_substep(self, action: np.ndarray) -> None:
        """Advance the physical state by one dt."""
        h = self.dt / self.integrator_substeps
        for _ in range(self.integrator_substeps):
            self.velocity = self.velocity + 0.5 * h * self._accelerations(action)
            self.position = self.position + h * self.velocity
            self.velocity = self.velocity + 0.5 * h * self._accelerations(action)
            self._constrain()
        self._elapsed += 1

    def ground_truth_state(self) -> np.ndarray:
        if self._stack is None:
            raise NotResetError(f"{self.spec.name}: call reset() before ground_truth_state()")
        return self._ground_truth()

    def render(self) -> np.ndarray:
        """Current frame, (H, W, C) float32 in [0, 1]."""
        canvas = Canvas(self.spec.render_size, self.spec.channels, self.extent)
        self._draw(canvas)
        return canvas.pixels

    def physical_state(self) -> np.ndarray:
        return np.concatenate([self.position, self.velocity])

    def set_physical_state(self, position: np.ndarray, velocity: np.ndarray) -> None:
        self.position = np.asarray(position, dtype=np.float64).copy()
        self.velocity = np.asarray(velocity, dtype=np.float64).copy()

    @property
    def done(self) -> bool:
        return not self._ready

    def _make_stack(self) -> FrameStack:
        return FrameStack(
            frames=np.concatenate(list(self._frames), axis=-1),
            timestep=self._timestep,
            k=self.frame_stack,
        )
