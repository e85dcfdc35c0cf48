"""Random cross-domain data collection and the per-domain frame buffers."""

from protolab.collect.buffer import DomainBuffer, to_bytes
from protolab.collect.random_collect import (
    collect_many,
    collect_random,
    sample_pair_indices,
    sample_pairs,
    uniform_actions,
)
from protolab.collect.storage import load_buffer, save_buffer

__all__ = [
    "DomainBuffer",
    "collect_many",
    "collect_random",
    "load_buffer",
    "sample_pair_indices",
    "sample_pairs",
    "save_buffer",
    "to_bytes",
    "uniform_actions",
]
