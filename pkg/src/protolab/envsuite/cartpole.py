"""Cart-pole swing-up.

Classic cart-pole equations of motion with the pole angle measured from upright; the
pole starts hanging. The cart runs on a rail with hard stops.
"""

from __future__ import annotations

import numpy as np

from protolab.envsuite.base import Environment
from protolab.envsuite.render import Canvas
from protolab.registry import register_domain

GRAVITY = 9.8
CART_MASS = 1.0
POLE_MASS = 0.1
HALF_LENGTH = 0.5
MAX_FORCE = 10.0
RAIL_LIMIT = 3.0

_TOTAL_MASS = CART_MASS + POLE_MASS


class CartpoleEnv(Environment):
    extent = 3.3

    def _initial_state(self, rng: np.random.Generator) -> None:
        # position = (x, theta), velocity = (x_dot, theta_dot)
        x, theta = 0.01 * rng.standard_normal(2)
        self.position = np.array([x, np.pi + theta])
        self.velocity = np.zeros(2)

    def _accelerations(self, action: np.ndarray) -> np.ndarray:
        force = MAX_FORCE * action[0]
        theta, theta_dot = self.position[1], self.velocity[1]
        sin_t, cos_t = np.sin(theta), np.cos(theta)
        temp = (force + POLE_MASS * HALF_LENGTH * theta_dot * theta_dot * sin_t) / _TOTAL_MASS
        theta_acc = (GRAVITY * sin_t - cos_t * temp) / (
            HALF_LENGTH * (4.0 / 3.0 - POLE_MASS * cos_t * cos_t / _TOTAL_MASS)
        )
        x_acc = temp - POLE_MASS * HALF_LENGTH * theta_acc * cos_t / _TOTAL_MASS
        return np.array([x_acc, theta_acc])

    def _constrain(self) -> None:
        x = self.position[0]
        if abs(x) > RAIL_LIMIT:
            self.position[0] = np.clip(x, -RAIL_LIMIT, RAIL_LIMIT)
            self.velocity[0] = 0.0

    def _reward(self) -> float:
        x, theta = self.position
        upright = (1.0 + np.cos(theta)) / 2.0
        centered = (1.0 + np.exp(-x * x)) / 2.0
        return float(upright * centered)

    def _ground_truth(self) -> np.ndarray:
        x, theta = self.position
        x_dot, theta_dot = self.velocity
        return np.array([x, np.cos(theta), np.sin(theta), x_dot, theta_dot])

    def _draw(self, canvas: Canvas) -> None:
        x, theta = self.position
        pole_len = 2.0 * HALF_LENGTH * 2.0  # drawn at twice scale for visibility
        canvas.segment(-RAIL_LIMIT, 0.0, RAIL_LIMIT, 0.0, 0.08, "rail")
        canvas.box(x, 0.0, 0.4, 0.2, "cart")
        canvas.segment(x, 0.0, x + pole_len * np.sin(theta), pole_len * np.cos(theta), 0.25, "pole")


register_domain(
    name="cartpole",
    module_path=__name__,
    factory="CartpoleEnv",
    state_dim=5,
    action_dim=1,
    description="Cart-pole swing-up from the hanging position",
    group="locomotion",
)
