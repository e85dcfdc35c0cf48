"""Prototype-guided kNN exploration reward.

Each prototype picks the candidate latent it scores highest; the picks go into a FIFO
projection set Q, and the reward of a latent is its Euclidean distance to the k-th nearest
member of Q. Members remember the identity token of the candidate they came from, so a
latent never counts itself as a neighbour.
"""

from __future__ import annotations

import logging
from collections import deque
from typing import TYPE_CHECKING

import numpy as np

from protolab.exceptions import EmptyBatchError, InsufficientNeighborsError, ShapeMismatchError
from protolab.ndmath.ops import unit_rows

if TYPE_CHECKING:
    from protolab.protolearn.networks import PrototypeBank

logger = logging.getLogger(__name__)

ANONYMOUS = -1


class ProjectionSet:
    """At most ``capacity`` latent vectors, oldest evicted first."""

    def __init__(self, capacity: int, dim: int | None = None):
        if capacity <= 0:
            raise ValueError(f"capacity must be positive, got {capacity}")
        self.capacity = capacity
        self.dim = dim
        self._vectors: deque[np.ndarray] = deque(maxlen=capacity)
        self._tokens: deque[int] = deque(maxlen=capacity)

    def __len__(self) -> int:
        return len(self._vectors)

    @property
    def members(self) -> np.ndarray:
        if not self._vectors:
            return np.zeros((0, self.dim or 0))
        return np.stack(self._vectors)

    @property
    def tokens(self) -> np.ndarray:
        return np.asarray(self._tokens, dtype=np.int64)

    def extend(self, vectors: np.ndarray, tokens: np.ndarray | None = None) -> None:
        vectors = np.atleast_2d(np.asarray(vectors, dtype=np.float64))
        if self.dim is None:
            self.dim = vectors.shape[1]
        if vectors.shape[1] != self.dim:
            raise ShapeMismatchError(f"latent of dim {vectors.shape[1]}, set holds dim {self.dim}")
        if not np.isfinite(vectors).all():
            raise ValueError("projection set members must be finite")
        if tokens is None:
            tokens = np.full(len(vectors), ANONYMOUS, dtype=np.int64)
        for vector, token in zip(vectors, tokens, strict=True):
            self._vectors.append(vector.copy())
            self._tokens.append(int(token))


def _prototype_units(bank: PrototypeBank | np.ndarray) -> np.ndarray:
    raw = bank if isinstance(bank, np.ndarray) else bank.raw.data
    return unit_rows(np.asarray(raw, dtype=np.float64), axis=1)


def select_candidates(candidates: np.ndarray, bank: PrototypeBank | np.ndarray) -> np.ndarray:
    """Index of the best candidate for every prototype (ties go to the lowest index)."""
    candidates = np.atleast_2d(np.asarray(candidates, dtype=np.float64))
    if candidates.shape[0] == 0:
        raise EmptyBatchError("update_Q needs at least one candidate")
    scores = _prototype_units(bank) @ unit_rows(candidates, axis=1).T
    return np.argmax(scores, axis=1)


def update_Q(
    q_set: ProjectionSet,
    candidates: np.ndarray,
    bank: PrototypeBank | np.ndarray,
    tokens: np.ndarray | None = None,
) -> ProjectionSet:
    """Append each prototype's chosen candidate (in prototype order) to ``q_set``."""
    candidates = np.atleast_2d(np.asarray(candidates, dtype=np.float64))
    chosen = select_candidates(candidates, bank)
    picked_tokens = None if tokens is None else np.asarray(tokens, dtype=np.int64)[chosen]
    q_set.extend(candidates[chosen], picked_tokens)
    return q_set


def _distances(latents: np.ndarray, members: np.ndarray) -> np.ndarray:
    """(n, |Q|) Euclidean distances."""
    diff = latents[:, None, :] - members[None, :, :]
    return np.sqrt(np.sum(diff * diff, axis=2))


def knn_rewards(
    latents: np.ndarray,
    q_set: ProjectionSet,
    k: int = 3,
    tokens: np.ndarray | None = None,
    *,
    missing: float | None = None,
) -> np.ndarray:
    """k-th nearest-neighbour distance in Q for each row of ``latents``.

    Rows with fewer than k usable neighbours raise, unless ``missing`` gives their value.
    """
    latents = np.atleast_2d(np.asarray(latents, dtype=np.float64))
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    members = q_set.members
    dist = _distances(latents, members) if len(members) else np.zeros((len(latents), 0))
    if tokens is not None:
        own = np.asarray(tokens, dtype=np.int64)[:, None]
        same = (q_set.tokens[None, :] == own) & (own != ANONYMOUS)
        dist = np.where(same, np.inf, dist)
    usable = np.isfinite(dist).sum(axis=1) if dist.size else np.zeros(len(latents), dtype=int)
    short = usable < k
    if short.any() and missing is None:
        raise InsufficientNeighborsError(
            f"need {k} neighbours in Q, only {int(usable.min())} available"
        )
    if short.all():
        return np.full(len(latents), missing, dtype=np.float64)
    width = dist.shape[1]
    kth = np.partition(dist, min(k, width) - 1, axis=1)[:, min(k, width) - 1]
    return np.where(short, missing if missing is not None else 0.0, kth)


def knn_reward(
    z_next: np.ndarray,
    q_set: ProjectionSet,
    k: int = 3,
    token: int | None = None,
) -> float:
    """Distance from ``z_next`` to its k-th nearest neighbour in Q."""
    tokens = None if token is None else np.array([token])
    return float(knn_rewards(np.reshape(z_next, (1, -1)), q_set, k, tokens)[0])


def augment_reward(
    r: float | np.ndarray, r_hat: float | np.ndarray, beta: float,
) -> float | np.ndarray:
    """r + beta * r_hat."""
    return r + beta * r_hat
