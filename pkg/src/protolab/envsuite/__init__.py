"""Toy continuous-control domains with pixel observations."""

from __future__ import annotations

from protolab.config import EnvConfig
from protolab.envsuite.base import Environment, seed_generator
from protolab.envsuite.spec import DomainSpec, FrameStack, Transition
from protolab.registry import get_domain, list_domains, load_factory


def domain_spec(name: str, env: EnvConfig | None = None) -> DomainSpec:
    """DomainSpec for a registered domain at the configured render scale."""
    env = env or EnvConfig()
    reg = get_domain(name)
    return DomainSpec(
        name=name,
        state_dim=reg.state_dim,
        action_dim=reg.action_dim,
        render_size=env.render_size,
        channels=3 if env.rgb else 1,
        episode_length=env.episode_length,
        action_repeat=env.action_repeat,
    )


def make_env(name: str, env: EnvConfig | None = None) -> Environment:
    """Build a fresh environment instance; raises UnknownDomainError for unknown names."""
    env = env or EnvConfig()
    spec = domain_spec(name, env)
    factory = load_factory(name)
    return factory(
        spec,
        dt=env.dt,
        integrator_substeps=env.integrator_substeps,
        frame_stack=env.frame_stack,
    )


def reset(name: str, seed: int, env: EnvConfig | None = None) -> tuple[Environment, FrameStack]:
    """Build and reset in one call."""
    instance = make_env(name, env)
    return instance, instance.reset(seed)


__all__ = [
    "DomainSpec",
    "Environment",
    "FrameStack",
    "Transition",
    "domain_spec",
    "list_domains",
    "make_env",
    "reset",
    "seed_generator",
]
