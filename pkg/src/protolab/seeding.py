"""Named random streams derived from one root seed.

Every phase draws from its own stream (``collect``, ``ssl``, ``rl``, ``eval`` ...), so
re-running one phase never shifts the randomness of another.
"""

from __future__ import annotations

import hashlib

import numpy as np

STREAMS = ("collect", "ssl", "finetune", "rl", "eval", "metrics")


def _name_key(name: str) -> int:
    return int.from_bytes(hashlib.sha256(name.encode()).digest()[:8], "little")


def derive_seed(root: int, name: str) -> int:
    """Deterministic 63-bit seed for the stream ``name`` under ``root``."""
    seq = np.random.SeedSequence([root & 0xFFFFFFFFFFFFFFFF, _name_key(name)])
    return int(seq.generate_state(2, dtype=np.uint64)[0] >> np.uint64(1))


def rng_for(root: int, name: str) -> np.random.Generator:
    return np.random.default_rng(derive_seed(root, name))


def named_seeds(root: int, names: tuple[str, ...] = STREAMS) -> dict[str, int]:
    """Seeds of all named streams, as recorded in run manifests."""
    return {name: derive_seed(root, name) for name in names}
