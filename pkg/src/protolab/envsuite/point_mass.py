"""Point-mass reacher in the unit arena [-1, 1]^2 with a goal drawn at reset."""

from __future__ import annotations

import numpy as np

from protolab.envsuite.base import Environment
from protolab.envsuite.render import Canvas
from protolab.registry import register_domain

ARENA = 1.0
DAMPING = 1.0
FORCE = 1.0
GOAL_THRESHOLD = 0.1
SPAWN = 0.8


class PointMassEnv(Environment):
    extent = 1.1

    goal: np.ndarray

    def _initial_state(self, rng: np.random.Generator) -> None:
        self.position = rng.uniform(-SPAWN, SPAWN, size=2)
        self.velocity = np.zeros(2)
        self.goal = rng.uniform(-SPAWN, SPAWN, size=2)

    def _accelerations(self, action: np.ndarray) -> np.ndarray:
        return FORCE * action - DAMPING * self.velocity

    def _constrain(self) -> None:
        hit = np.abs(self.position) > ARENA
        if hit.any():
            self.position = np.clip(self.position, -ARENA, ARENA)
            self.velocity = np.where(hit, 0.0, self.velocity)

    def distance_to_goal(self) -> float:
        return float(np.linalg.norm(self.position - self.goal))

    def _reward(self) -> float:
        distance = self.distance_to_goal()
        return 1.0 if distance < GOAL_THRESHOLD else -distance

    def _ground_truth(self) -> np.ndarray:
        return np.concatenate([self.position, self.velocity, self.goal])

    def _draw(self, canvas: Canvas) -> None:
        canvas.disk(self.goal[0], self.goal[1], 0.12, "goal")
        canvas.disk(self.position[0], self.position[1], 0.1, "agent")


register_domain(
    name="point_mass",
    module_path=__name__,
    factory="PointMassEnv",
    state_dim=6,
    action_dim=2,
    description="Point-mass reach to a random goal",
    group="manipulation",
)
