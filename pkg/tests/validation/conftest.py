"""Experiment-scale checks. Skipped unless PROTOLAB_RUN_SLOW=1."""

from __future__ import annotations

from collections.abc import Callable
from functools import cache

import pytest

from protolab.collect import DomainBuffer, collect_many
from protolab.config import RunConfig, get_settings
from protolab.seeding import derive_seed

BufferSource = Callable[[int, tuple[str, ...]], dict[str, DomainBuffer]]


def pytest_collection_modifyitems(config: pytest.Config, items: list[pytest.Item]) -> None:
    if get_settings().run_slow:
        return
    skip = pytest.mark.skip(reason="slow validation run; set PROTOLAB_RUN_SLOW=1")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture(scope="session")
def desk_config() -> RunConfig:
    return RunConfig()


@pytest.fixture(scope="session")
def desk_buffers(desk_config: RunConfig) -> BufferSource:
    """Random-policy buffers per (root seed, domains), collected once per session."""

    @cache
    def collect(seed: int, domains: tuple[str, ...]) -> dict[str, DomainBuffer]:
        root = derive_seed(seed, "collect")
        return collect_many(
            list(domains),
            {name: derive_seed(root, name) for name in domains},
            env=desk_config.env,
            collect=desk_config.collect,
        )

    return collect
