"""Shared fixtures: small configs, seeded generators, tiny encoders and buffers."""

from __future__ import annotations

import numpy as np
import pytest

from protolab.collect import DomainBuffer, collect_random
from protolab.config import EnvConfig, RunConfig, SslConfig, validate_config
from protolab.protolearn import EncoderSpec, init_models


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def small_env() -> EnvConfig:
    """16x16 grayscale frames, 20-substep episodes."""
    return EnvConfig(render_size=16, episode_length=20, action_repeat=2)


@pytest.fixture
def small_ssl() -> SslConfig:
    return SslConfig(
        prototypes=8,
        latent_dim=6,
        batch_size=8,
        predictor_hidden=8,
        conv_channels=(4, 4),
        conv_strides=(2, 1),
        shift_pad=2,
        pretrain_steps=4,
        finetune_steps=2,
        coverage_interval=2,
    )


@pytest.fixture
def small_spec() -> EncoderSpec:
    return EncoderSpec(
        in_channels=3,
        render_size=16,
        conv_channels=(4, 4),
        conv_strides=(2, 1),
        latent_dim=6,
        predictor_hidden=8,
        prototypes=8,
    )


@pytest.fixture
def small_models(small_spec):
    return init_models(small_spec, seed=0, dtype=np.float64)


@pytest.fixture
def pendulum_buffer(small_env) -> DomainBuffer:
    return collect_random("pendulum", 60, seed=3, env=small_env)


@pytest.fixture
def point_mass_buffer(small_env) -> DomainBuffer:
    return collect_random("point_mass", 60, seed=4, env=small_env)


@pytest.fixture
def tiny_run_config() -> RunConfig:
    """A complete run that finishes in seconds."""
    return validate_config(
        "precision = float64\n"
        "domains = pendulum, point_mass\n"
        "downstream_domains = pendulum\n"
        "env.render_size = 16\n"
        "env.episode_length = 20\n"
        "collect.capacity = 60\n"
        "collect.steps = 60\n"
        "ssl.prototypes = 8\n"
        "ssl.latent_dim = 6\n"
        "ssl.batch_size = 8\n"
        "ssl.predictor_hidden = 8\n"
        "ssl.conv_channels = 4, 4\n"
        "ssl.conv_strides = 2, 1\n"
        "ssl.shift_pad = 2\n"
        "ssl.pretrain_steps = 4\n"
        "ssl.coverage_interval = 2\n"
        "rl.batch_size = 8\n"
        "rl.seed_steps = 10\n"
        "rl.total_steps = 20\n"
        "rl.feature_dim = 8\n"
        "rl.hidden_dim = 8\n"
        "rl.q_capacity = 64\n"
        "rl.eval_interval = 20\n"
        "rl.eval_episodes = 2\n"
    )
