"""Domain registry.

Environment modules call ``register_domain()`` at import time; the collector, the
downstream trainer and the CLI look domains up by name.

    from protolab.registry import register_domain

    register_domain(
        name="pendulum",
        module_path="protolab.envsuite.pendulum",
        factory="PendulumEnv",
        state_dim=3,
        action_dim=1,
        group="balance",
    )
"""

from __future__ import annotations

import importlib
import logging
from collections.abc import Callable
from dataclasses import dataclass
from typing import Any

from protolab.exceptions import UnknownDomainError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DomainRegistration:
    """A registered toy domain."""
    name: str
    module_path: str
    factory: str  # class or callable: factory(spec, rgb=...) -> Environment
    state_dim: int
    action_dim: int
    description: str = ""
    group: str = ""  # "balance", "locomotion", "manipulation"


_domain_registry: dict[str, DomainRegistration] = {}

_BUILTIN_MODULES = (
    "protolab.envsuite.pendulum",
    "protolab.envsuite.cartpole",
    "protolab.envsuite.point_mass",
)


def register_domain(
    name: str,
    module_path: str,
    factory: str,
    state_dim: int,
    action_dim: int,
    description: str = "",
    group: str = "",
) -> DomainRegistration:
    """Register a domain. Re-registering a name replaces the entry."""
    reg = DomainRegistration(
        name=name,
        module_path=module_path,
        factory=factory,
        state_dim=state_dim,
        action_dim=action_dim,
        description=description,
        group=group,
    )
    _domain_registry[name] = reg
    logger.debug("Registered domain: %s (%s)", name, group)
    return reg


def _ensure_builtins() -> None:
    for module_path in _BUILTIN_MODULES:
        importlib.import_module(module_path)


def get_domain(name: str) -> DomainRegistration:
    """Look up a registered domain by name."""
    _ensure_builtins()
    reg = _domain_registry.get(name)
    if reg is None:
        raise UnknownDomainError(
            f"Unknown domain: {name}. Registered: {sorted(_domain_registry)}"
        )
    return reg


def list_domains() -> dict[str, DomainRegistration]:
    """Return all registered domains."""
    _ensure_builtins()
    return dict(_domain_registry)


def load_factory(name: str) -> Callable[..., Any]:
    """Import and return the environment factory for a domain."""
    reg = get_domain(name)
    mod = importlib.import_module(reg.module_path)
    return getattr(mod, reg.factory)
