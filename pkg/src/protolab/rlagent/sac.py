"""Soft actor-critic on frozen encoder features.

The actor and the critic each own a trunk (Linear, LayerNorm, tanh) in front of their
heads. The critic has two Q heads on concat(feature, action) and an EMA target copy.
Actions are tanh-squashed Gaussians; the temperature is learned towards an entropy of
-action_dim.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from protolab.config import RlConfig
from protolab.exceptions import ShapeMismatchError
from protolab.ndmath import ops
from protolab.ndmath.layers import MLP, LayerNorm, Linear, Module
from protolab.ndmath.optim import Adam
from protolab.ndmath.params import ParamSet, ema_update
from protolab.ndmath.tensor import Tape, Tensor, no_tape

logger = logging.getLogger(__name__)

_HALF_LOG_2PI = 0.5 * np.log(2.0 * np.pi)
_SQUASH_FLOOR = 1e-6


@dataclass
class EncodedTransition:
    y: np.ndarray
    action: np.ndarray
    reward: float            # extrinsic plus weighted intrinsic
    y_next: np.ndarray
    terminal: bool = False


@dataclass
class EncodedBatch:
    y: np.ndarray            # (B, repr_dim)
    action: np.ndarray       # (B, action_dim)
    reward: np.ndarray       # (B,)
    y_next: np.ndarray
    not_done: np.ndarray     # (B,)

    @classmethod
    def stack(cls, transitions: list[EncodedTransition]) -> EncodedBatch:
        return cls(
            y=np.stack([t.y for t in transitions]),
            action=np.stack([np.asarray(t.action, dtype=np.float64) for t in transitions]),
            reward=np.array([t.reward for t in transitions], dtype=np.float64),
            y_next=np.stack([t.y_next for t in transitions]),
            not_done=np.array([0.0 if t.terminal else 1.0 for t in transitions]),
        )


class Trunk(Module):
    """tanh(LayerNorm(Linear(y)))."""

    def __init__(
        self,
        repr_dim: int,
        feature_dim: int,
        rng: np.random.Generator,
        *,
        dtype: np.dtype | type = np.float32,
    ):
        self.linear = Linear(repr_dim, feature_dim, rng, dtype=dtype)
        self.norm = LayerNorm(feature_dim, dtype=dtype)

    def __call__(self, y: Tensor) -> Tensor:
        return ops.tanh(self.norm(self.linear(y)))

    def parameters(self) -> ParamSet:
        return ParamSet.merged({"linear": self.linear.parameters(), "norm": self.norm.parameters()})


class Actor(Module):
    def __init__(
        self,
        repr_dim: int,
        action_dim: int,
        config: RlConfig,
        rng: np.random.Generator,
        *,
        dtype: np.dtype | type = np.float32,
    ):
        self.action_dim = action_dim
        self.log_std_min = config.log_std_min
        self.log_std_max = config.log_std_max
        self.trunk = Trunk(repr_dim, config.feature_dim, rng, dtype=dtype)
        self.head = MLP(
            [config.feature_dim, config.hidden_dim, config.hidden_dim, 2 * action_dim],
            rng, dtype=dtype,
        )

    def __call__(self, y: Tensor) -> tuple[Tensor, Tensor]:
        """(mu, log_std), log_std squashed into [log_std_min, log_std_max]."""
        out = self.head(self.trunk(y))
        mu = out[:, :self.action_dim]
        raw = ops.tanh(out[:, self.action_dim:])
        half_span = 0.5 * (self.log_std_max - self.log_std_min)
        log_std = (raw + 1.0) * half_span + self.log_std_min
        return mu, log_std

    def parameters(self) -> ParamSet:
        return ParamSet.merged({"trunk": self.trunk.parameters(), "head": self.head.parameters()})


class Critic(Module):
    def __init__(
        self,
        repr_dim: int,
        action_dim: int,
        config: RlConfig,
        rng: np.random.Generator,
        *,
        dtype: np.dtype | type = np.float32,
    ):
        self.trunk = Trunk(repr_dim, config.feature_dim, rng, dtype=dtype)
        sizes = [config.feature_dim + action_dim, config.hidden_dim, config.hidden_dim, 1]
        self.q1 = MLP(sizes, rng, dtype=dtype)
        self.q2 = MLP(sizes, rng, dtype=dtype)

    def __call__(self, y: Tensor, action: Tensor) -> tuple[Tensor, Tensor]:
        h = ops.concat([self.trunk(y), action], axis=1)
        return self.q1(h), self.q2(h)

    def parameters(self) -> ParamSet:
        return ParamSet.merged({
            "trunk": self.trunk.parameters(),
            "q1": self.q1.parameters(),
            "q2": self.q2.parameters(),
        })


def squashed_sample(
    mu: Tensor, log_std: Tensor, noise: np.ndarray,
) -> tuple[Tensor, Tensor]:
    """tanh(mu + sigma * noise) and its log density, shape (B, 1)."""
    pre = mu + ops.exp(log_std) * noise
    action = ops.tanh(pre)
    gaussian = ops.sum(-0.5 * (noise * noise) - log_std, axis=1, keepdims=True)
    gaussian = gaussian - _HALF_LOG_2PI * mu.shape[1]
    squash = ops.sum(
        ops.log(ops.relu(1.0 - action * action) + _SQUASH_FLOOR), axis=1, keepdims=True,
    )
    return action, gaussian - squash


class SacAgent:
    """Actor, twin critic, critic target and learned temperature."""

    def __init__(
        self,
        repr_dim: int,
        action_dim: int,
        config: RlConfig,
        rng: np.random.Generator,
        *,
        dtype: np.dtype | type = np.float32,
    ):
        self.repr_dim = repr_dim
        self.action_dim = action_dim
        self.config = config
        self.dtype = np.dtype(dtype)
        self.discount = config.discount
        self.rng = rng
        self.actor = Actor(repr_dim, action_dim, config, rng, dtype=dtype)
        self.critic = Critic(repr_dim, action_dim, config, rng, dtype=dtype)
        self.critic_target_net = Critic(repr_dim, action_dim, config, rng, dtype=dtype)
        self.critic_target_net.parameters().assign(self.critic.parameters())
        self.log_alpha = Tensor(
            np.array(np.log(config.init_temperature), dtype=dtype), requires_grad=True,
        )
        self.target_entropy = -float(action_dim)
        self.actor_optimizer = Adam(self.actor.parameters(), lr=config.actor_lr)
        self.critic_optimizer = Adam(self.critic.parameters(), lr=config.critic_lr)
        self.alpha_optimizer = Adam(
            ParamSet({"log_alpha": self.log_alpha}), lr=config.temperature_lr, betas=(0.5, 0.999),
        )
        self.updates = 0

    @property
    def alpha(self) -> float:
        return float(np.exp(self.log_alpha.data))

    def _tensor(self, values: np.ndarray) -> Tensor:
        return Tensor(np.asarray(values, dtype=self.dtype))

    def act(
        self, y: np.ndarray, stochastic: bool = True, rng: np.random.Generator | None = None,
    ) -> np.ndarray:
        """Action(s) in [-1, 1] for features ``y`` of shape (repr_dim,) or (n, repr_dim)."""
        y = np.asarray(y)
        single = y.ndim == 1
        if y.shape[-1] != self.repr_dim:
            raise ShapeMismatchError(
                f"features of dim {y.shape[-1]}, agent expects {self.repr_dim}"
            )
        with no_tape():
            mu, log_std = self.actor(self._tensor(np.atleast_2d(y)))
            pre = mu.data.astype(np.float64)
            if stochastic:
                noise = (rng or self.rng).standard_normal(pre.shape)
                pre = pre + np.exp(log_std.data.astype(np.float64)) * noise
        action = np.tanh(pre)
        return action[0] if single else action

    def critic_target(self, batch: EncodedBatch) -> np.ndarray:
        """r + not_done * gamma * (min target Q(y', a') - alpha * log pi(a' | y'))."""
        reward = np.asarray(batch.reward, dtype=np.float64)
        if self.discount == 0.0:
            return reward.copy()
        with no_tape():
            y_next = self._tensor(batch.y_next)
            mu, log_std = self.actor(y_next)
            noise = self.rng.standard_normal(mu.shape)
            action, log_prob = squashed_sample(mu, log_std, noise)
            q1, q2 = self.critic_target_net(y_next, action)
            soft = np.minimum(q1.data, q2.data) - self.alpha * log_prob.data
        return reward + np.asarray(batch.not_done) * self.discount * soft[:, 0].astype(np.float64)

    def update_critic(self, batch: EncodedBatch) -> float:
        target = self._tensor(self.critic_target(batch)[:, None])
        self.critic_optimizer.zero_grad()
        with Tape() as tape:
            q1, q2 = self.critic(self._tensor(batch.y), self._tensor(batch.action))
            d1 = q1 - target
            d2 = q2 - target
            loss = ops.mean(d1 * d1) + ops.mean(d2 * d2)
            tape.backward(loss)
        self.critic_optimizer.step()
        return loss.item()

    def update_actor_and_alpha(self, batch: EncodedBatch) -> tuple[float, float]:
        y = self._tensor(batch.y)
        noise = self.rng.standard_normal((len(batch.reward), self.action_dim))
        self.actor_optimizer.zero_grad()
        with Tape() as tape:
            mu, log_std = self.actor(y)
            action, log_prob = squashed_sample(mu, log_std, noise)
            q1, q2 = self.critic(y, action)
            actor_loss = ops.mean(self.alpha * log_prob - ops.minimum(q1, q2))
            tape.backward(actor_loss)
        self.actor_optimizer.step()
        # the actor pass also reached the critic; drop those gradients
        self.critic_optimizer.zero_grad()

        entropy_gap = -log_prob.data - self.target_entropy
        self.alpha_optimizer.zero_grad()
        with Tape() as tape:
            alpha_loss = ops.mean(ops.exp(self.log_alpha) * self._tensor(entropy_gap))
            tape.backward(alpha_loss)
        self.alpha_optimizer.step()
        return actor_loss.item(), alpha_loss.item()

    def update(self, batch: EncodedBatch) -> dict[str, float]:
        """One critic update; actor, temperature and critic target on their own schedules."""
        cfg = self.config
        self.updates += 1
        stats = {"critic_loss": self.update_critic(batch)}
        if self.updates % cfg.actor_update_freq == 0:
            stats["actor_loss"], stats["alpha_loss"] = self.update_actor_and_alpha(batch)
        if self.updates % cfg.critic_target_freq == 0:
            ema_update(
                self.critic_target_net.parameters(), self.critic.parameters(),
                cfg.critic_target_momentum,
            )
        return stats

    # --- state -------------------------------------------------------------

    def _modules(self) -> tuple[tuple[str, Module], ...]:
        return (
            ("actor", self.actor),
            ("critic", self.critic),
            ("critic_target", self.critic_target_net),
        )

    def state_arrays(self) -> dict[str, np.ndarray]:
        arrays: dict[str, np.ndarray] = {}
        for prefix, module in self._modules():
            arrays.update({f"{prefix}.{k}": v for k, v in module.parameters().to_arrays().items()})
        arrays["log_alpha"] = np.atleast_1d(self.log_alpha.data)
        return arrays

    def load_state_arrays(self, arrays: dict[str, np.ndarray]) -> None:
        for prefix, module in self._modules():
            module.parameters().load_arrays({
                k.removeprefix(f"{prefix}."): v for k, v in arrays.items()
                if k.startswith(f"{prefix}.")
            })
        self.log_alpha.data[...] = arrays["log_alpha"].reshape(())
