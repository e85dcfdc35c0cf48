"""Pendulum swing-up with a sparse upright bonus.

The angle is measured from upright, so the hanging rest state is theta = pi.
"""

from __future__ import annotations

import numpy as np

from protolab.envsuite.base import Environment
from protolab.envsuite.render import Canvas
from protolab.registry import register_domain

GRAVITY = 10.0
LENGTH = 1.0
MASS = 1.0
MAX_TORQUE = 2.0
UPRIGHT_COS = np.cos(np.deg2rad(30.0))


class PendulumEnv(Environment):
    extent = 1.2

    def _initial_state(self, rng: np.random.Generator) -> None:
        self.position = np.array([rng.uniform(-np.pi, np.pi)])
        self.velocity = np.zeros(1)

    def _accelerations(self, action: np.ndarray) -> np.ndarray:
        torque = MAX_TORQUE * action[0]
        return np.array([
            GRAVITY / LENGTH * np.sin(self.position[0]) + torque / (MASS * LENGTH * LENGTH)
        ])

    def _reward(self) -> float:
        return 1.0 if np.cos(self.position[0]) >= UPRIGHT_COS else 0.0

    def _ground_truth(self) -> np.ndarray:
        theta = self.position[0]
        return np.array([np.cos(theta), np.sin(theta), self.velocity[0]])

    def energy(self) -> float:
        """Mechanical energy with the pivot as potential reference."""
        theta, omega = self.position[0], self.velocity[0]
        kinetic = 0.5 * MASS * LENGTH * LENGTH * omega * omega
        return float(kinetic + MASS * GRAVITY * LENGTH * np.cos(theta))

    def _draw(self, canvas: Canvas) -> None:
        theta = self.position[0]
        tip_x, tip_y = LENGTH * np.sin(theta), LENGTH * np.cos(theta)
        canvas.segment(0.0, 0.0, tip_x, tip_y, 0.12, "pole")
        canvas.disk(tip_x, tip_y, 0.15, "body")


register_domain(
    name="pendulum",
    module_path=__name__,
    factory="PendulumEnv",
    state_dim=3,
    action_dim=1,
    description="Pendulum swing-up, sparse reward within 30 degrees of upright",
    group="balance",
)
