"""Decoupled random collection.

Frames are gathered with a uniform-random policy before, and independently of, any
encoder training. Nothing here can see encoder parameters.
"""

from __future__ import annotations

import logging
from collections.abc import Mapping, Sequence
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from protolab.collect.buffer import DomainBuffer
from protolab.config import CollectConfig, EnvConfig
from protolab.envsuite import make_env, seed_generator
from protolab.exceptions import CapacityExceededError, InsufficientDataError

logger = logging.getLogger(__name__)


def uniform_actions(rng: np.random.Generator, action_dim: int, count: int = 1) -> np.ndarray:
    """i.i.d. draws from the action box [-1, 1]^action_dim, shape (count, action_dim)."""
    return rng.uniform(-1.0, 1.0, size=(count, action_dim))


def collect_random(
    domain: str,
    steps: int,
    seed: int,
    *,
    env: EnvConfig | None = None,
    capacity: int | None = None,
    record_states: bool = True,
) -> DomainBuffer:
    """Fill a fresh buffer with ``steps`` post-step frames from uniform-random actions."""
    env = env or EnvConfig()
    capacity = capacity if capacity is not None else max(steps, 1)
    if steps > capacity:
        raise CapacityExceededError(f"{domain}: {steps} steps exceed capacity {capacity}")

    instance = make_env(domain, env)
    spec = instance.spec
    rng = seed_generator(seed)
    buffer = DomainBuffer(
        domain, capacity, spec.frame_shape, seed=seed,
        state_dim=spec.state_dim if record_states else None,
    )

    episodes = 0
    new_episode = True
    for _ in range(steps):
        if new_episode:
            instance.reset(int(rng.integers(2**63)))
            episodes += 1
        transition = instance.step(uniform_actions(rng, spec.action_dim)[0])
        buffer.append(
            transition.next_state.latest(),
            new_episode=new_episode,
            state=instance.ground_truth_state() if record_states else None,
        )
        new_episode = transition.truncated

    logger.info("[Collect] %s: %d frames over %d episodes (seed %d)", domain, steps, episodes, seed)
    return buffer


def _collect_job(args: tuple) -> DomainBuffer:
    domain, steps, seed, env, capacity, record_states = args
    return collect_random(
        domain, steps, seed, env=env, capacity=capacity, record_states=record_states,
    )


def collect_many(
    domains: Sequence[str],
    seeds: Mapping[str, int],
    *,
    env: EnvConfig | None = None,
    collect: CollectConfig | None = None,
) -> dict[str, DomainBuffer]:
    """One buffer per domain; fans out to worker processes when ``collect.workers > 1``."""
    env = env or EnvConfig()
    collect = collect or CollectConfig()
    jobs = [
        (name, collect.steps, seeds[name], env, collect.capacity, collect.record_states)
        for name in domains
    ]
    if collect.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(collect.workers, len(jobs))) as pool:
            buffers = list(pool.map(_collect_job, jobs))
    else:
        buffers = [_collect_job(job) for job in jobs]
    return dict(zip(domains, buffers, strict=True))


def sample_pair_indices(
    buffer: DomainBuffer, count: int, rng: np.random.Generator,
) -> np.ndarray:
    """``count`` frame indices t, drawn uniformly with replacement among valid pairs."""
    valid = buffer.pair_indices()
    if valid.size == 0:
        raise InsufficientDataError(
            f"{buffer.domain}: no temporal pairs in a buffer of {len(buffer)} frames"
        )
    return valid[rng.integers(0, valid.size, size=count)]


def sample_pairs(
    buffer: DomainBuffer,
    count: int,
    seed: int | np.random.Generator,
    frame_stack: int = 3,
) -> tuple[np.ndarray, np.ndarray]:
    """Stacked observations at t and t+1 for ``count`` sampled pairs, each (M, H, W, K*C)."""
    rng = seed if isinstance(seed, np.random.Generator) else seed_generator(seed)
    t = sample_pair_indices(buffer, count, rng)
    return buffer.stacked(t, frame_stack), buffer.stacked(t + 1, frame_stack)
