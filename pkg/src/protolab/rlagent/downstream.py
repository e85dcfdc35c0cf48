"""Downstream policy learning over a frozen encoder with prototype-guided exploration.

The encoder and prototypes are only ever read here. Pixels are random-shifted before
encoding, the next-frame projections feed the projection set Q, and the kNN distance in Q
(scaled by beta) is added to the environment reward before every SAC update.
"""

from __future__ import annotations

import csv
import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from protolab.collect.random_collect import uniform_actions
from protolab.config import EnvConfig, RlConfig, RunConfig
from protolab.envsuite import domain_spec, make_env
from protolab.exceptions import StorageIOError
from protolab.intrinsic import ProjectionSet, augment_reward, knn_rewards, update_Q
from protolab.ndmath.checkpoint import load_checkpoint, save_checkpoint
from protolab.protolearn.augment import augment_shift
from protolab.protolearn.networks import EncoderStack, PrototypeBank
from protolab.rlagent.replay import PixelBatch, ReplayBuffer
from protolab.rlagent.sac import EncodedBatch, SacAgent
from protolab.seeding import derive_seed

logger = logging.getLogger(__name__)

EVAL_FIELDS = ("env_step", "mean_return", "std_return", "beta", "seed")


@dataclass
class EvalRecord:
    env_step: int
    mean_return: float
    std_return: float
    beta: float
    seed: int


@dataclass
class DownstreamResult:
    agent: SacAgent
    log: list[EvalRecord] = field(default_factory=list)
    episode_returns: list[float] = field(default_factory=list)


def _run_episodes(
    domain: str,
    env_config: EnvConfig,
    episodes: int,
    seed: int,
    choose: Callable[[np.ndarray], np.ndarray],
) -> np.ndarray:
    env = make_env(domain, env_config)
    seeds = np.random.default_rng(seed).integers(2**63, size=episodes)
    returns = np.zeros(episodes)
    for i, episode_seed in enumerate(seeds):
        obs = env.reset(int(episode_seed))
        while True:
            tr = env.step(choose(obs.frames))
            returns[i] += tr.reward
            if tr.truncated:
                break
            obs = tr.next_state
    return returns


def evaluate_policy(
    agent: SacAgent,
    stack: EncoderStack,
    domain: str,
    env_config: EnvConfig,
    *,
    episodes: int = 10,
    seed: int = 0,
) -> tuple[float, float]:
    """Mean and std of returns of the deterministic policy on a fresh environment."""
    def choose(frames: np.ndarray) -> np.ndarray:
        return agent.act(stack.embed(frames[None])[0], stochastic=False)

    returns = _run_episodes(domain, env_config, episodes, seed, choose)
    return float(returns.mean()), float(returns.std())


def evaluate_random_policy(
    domain: str,
    env_config: EnvConfig | None = None,
    *,
    episodes: int = 10,
    seed: int = 0,
) -> EvalRecord:
    """The uniform-random baseline, in the same record shape as policy evaluations."""
    env_config = env_config or EnvConfig()
    action_dim = domain_spec(domain, env_config).action_dim
    rng = np.random.default_rng([seed & 0xFFFF_FFFF_FFFF_FFFF, 2])

    def choose(frames: np.ndarray) -> np.ndarray:
        return uniform_actions(rng, action_dim)[0]

    returns = _run_episodes(domain, env_config, episodes, seed, choose)
    return EvalRecord(
        env_step=0, mean_return=float(returns.mean()), std_return=float(returns.std()),
        beta=0.0, seed=seed,
    )


def encode_batch(
    batch: PixelBatch,
    stack: EncoderStack,
    bank: PrototypeBank,
    q_set: ProjectionSet,
    *,
    pad: int,
    beta: float,
    k: int,
    rng: np.random.Generator,
) -> EncodedBatch:
    """Shift, encode, grow Q from the next-frame projections and add the kNN reward."""
    obs = augment_shift(batch.obs, pad, rng)
    next_obs = augment_shift(batch.next_obs, pad, rng)
    y = stack.embed(obs)
    y_next = stack.embed(next_obs)
    if beta > 0:
        z_next = stack.project_features(y_next)
        update_Q(q_set, z_next, bank, tokens=batch.tokens)
        r_hat = knn_rewards(z_next, q_set, k, tokens=batch.tokens, missing=0.0)
        reward = augment_reward(batch.reward, r_hat, beta)
    else:
        reward = batch.reward
    return EncodedBatch(
        y=y, action=batch.action, reward=np.asarray(reward, dtype=np.float64),
        y_next=y_next, not_done=batch.not_done,
    )


def train_downstream(
    domain: str,
    stack: EncoderStack,
    bank: PrototypeBank,
    config: RunConfig,
    seed: int,
    *,
    steps: int | None = None,
) -> DownstreamResult:
    """SAC for ``steps`` (default I_d) environment steps on ``domain``."""
    rl, env_config = config.rl, config.env
    steps = rl.total_steps if steps is None else steps
    env = make_env(domain, env_config)
    spec = env.spec
    rng = np.random.default_rng([seed & 0xFFFF_FFFF_FFFF_FFFF, 3])
    agent = SacAgent(stack.repr_dim, spec.action_dim, rl, rng, dtype=stack.dtype)
    result = DownstreamResult(agent=agent)
    if steps == 0:
        return result

    h, w, c = spec.frame_shape
    replay = ReplayBuffer(
        rl.replay_capacity, (h, w, env_config.frame_stack * c), spec.action_dim, c,
    )
    q_set = ProjectionSet(rl.q_capacity, stack.spec.latent_dim)
    eval_seed = derive_seed(seed, "eval")
    logger.info(
        "[Downstream] %s: %d steps, beta=%.3g, %d warm-up", domain, steps, rl.beta, rl.seed_steps,
    )

    obs = env.reset(int(rng.integers(2**63)))
    episode_return = 0.0
    for step in range(1, steps + 1):
        if step <= rl.seed_steps:
            action = uniform_actions(rng, spec.action_dim)[0]
        else:
            action = agent.act(stack.embed(obs.frames[None])[0], stochastic=True)
        tr = env.step(action)
        replay.add(obs.frames, tr.action, tr.reward, tr.next_state.latest(), tr.terminal)
        episode_return += tr.reward
        if tr.truncated:
            result.episode_returns.append(episode_return)
            logger.debug("[Downstream] step %d: episode return %.2f", step, episode_return)
            episode_return = 0.0
            obs = env.reset(int(rng.integers(2**63)))
        else:
            obs = tr.next_state

        if step > rl.seed_steps and len(replay) >= rl.batch_size:
            encoded = encode_batch(
                replay.sample(rl.batch_size, rng), stack, bank, q_set,
                pad=config.ssl.shift_pad, beta=rl.beta, k=rl.knn_k, rng=rng,
            )
            agent.update(encoded)

        if step % rl.eval_interval == 0:
            mean, std = evaluate_policy(
                agent, stack, domain, env_config, episodes=rl.eval_episodes, seed=eval_seed,
            )
            result.log.append(
                EvalRecord(env_step=step, mean_return=mean, std_return=std, beta=rl.beta, seed=seed)
            )
            logger.info(
                "[Downstream] %s step %d/%d: eval return %.2f +/- %.2f",
                domain, step, steps, mean, std,
            )
    return result


# --- logs and checkpoints ----------------------------------------------------

def write_eval_log(records: Sequence[EvalRecord], path: str | Path) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(EVAL_FIELDS)
            for rec in records:
                writer.writerow([
                    rec.env_step, repr(rec.mean_return), repr(rec.std_return), rec.beta, rec.seed,
                ])
    except OSError as e:
        raise StorageIOError(f"cannot write evaluation log {path}: {e}") from e
    return path


def save_agent(path: str | Path, agent: SacAgent, metadata: dict[str, Any] | None = None) -> Path:
    meta = {
        "repr_dim": agent.repr_dim,
        "action_dim": agent.action_dim,
        "dtype": agent.dtype.name,
        "rl": agent.config.model_dump(),
        **(metadata or {}),
    }
    return save_checkpoint(path, agent.state_arrays(), meta)


def load_agent(path: str | Path) -> SacAgent:
    ckpt = load_checkpoint(path)
    meta = ckpt.metadata
    agent = SacAgent(
        meta["repr_dim"], meta["action_dim"], RlConfig(**meta["rl"]),
        np.random.default_rng(0), dtype=np.dtype(meta.get("dtype", "float32")),
    )
    agent.load_state_arrays(ckpt.tensors)
    return agent
