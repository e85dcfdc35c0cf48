"""Per-domain frame store with explicit episode boundaries."""

from __future__ import annotations

import numpy as np

from protolab.exceptions import CapacityExceededError, InsufficientDataError, ShapeMismatchError


def to_bytes(frame: np.ndarray) -> np.ndarray:
    """Pixels in [0, 1] to uint8 (pixel * 255, rounded)."""
    return np.rint(np.clip(frame, 0.0, 1.0) * 255.0).astype(np.uint8)


class DomainBuffer:
    """Append-only frames from one reward-free domain.

    Frames are held as uint8. ``episode_starts`` lists the index of the first frame of each
    episode; a pair (t, t+1) is valid only when t+1 does not open a new episode.
    Optional ``states`` rows hold the ground-truth physical state of each frame.
    """

    def __init__(
        self,
        domain: str,
        capacity: int,
        frame_shape: tuple[int, int, int],
        seed: int = 0,
        state_dim: int | None = None,
    ):
        if capacity <= 0:
            raise ValueError(f"capacity must be positive, got {capacity}")
        self.domain = domain
        self.capacity = capacity
        self.frame_shape = tuple(int(s) for s in frame_shape)
        self.seed = seed
        self._frames = np.zeros((capacity, *self.frame_shape), dtype=np.uint8)
        self._states = (
            np.zeros((capacity, state_dim), dtype=np.float64) if state_dim is not None else None
        )
        self.episode_starts: list[int] = []
        self._count = 0

    def __len__(self) -> int:
        return self._count

    @property
    def frames(self) -> np.ndarray:
        return self._frames[: self._count]

    @property
    def states(self) -> np.ndarray | None:
        return None if self._states is None else self._states[: self._count]

    @property
    def state_dim(self) -> int | None:
        return None if self._states is None else self._states.shape[1]

    def append(
        self,
        frame: np.ndarray,
        *,
        new_episode: bool = False,
        state: np.ndarray | None = None,
    ) -> int:
        """Store one frame (float in [0, 1] or uint8); returns its index."""
        if self._count >= self.capacity:
            raise CapacityExceededError(f"{self.domain}: buffer full at {self.capacity} frames")
        if frame.shape != self.frame_shape:
            raise ShapeMismatchError(f"frame of shape {frame.shape}, want {self.frame_shape}")
        index = self._count
        self._frames[index] = frame if frame.dtype == np.uint8 else to_bytes(frame)
        if self._states is not None:
            if state is None:
                raise ShapeMismatchError(f"{self.domain}: buffer records states, none given")
            self._states[index] = state
        if new_episode or index == 0:
            self.episode_starts.append(index)
        self._count += 1
        return index

    def episode_start_of(self, index: np.ndarray | int) -> np.ndarray:
        """Index of the first frame of the episode containing ``index``."""
        starts = np.asarray(self.episode_starts, dtype=np.int64)
        pos = np.searchsorted(starts, np.asarray(index), side="right") - 1
        return starts[pos]

    def pair_indices(self) -> np.ndarray:
        """All t with (t, t+1) inside one episode."""
        if self._count < 2:
            return np.zeros(0, dtype=np.int64)
        valid = np.ones(self._count - 1, dtype=bool)
        starts = np.asarray(self.episode_starts, dtype=np.int64)
        crossing = starts[(starts > 0) & (starts < self._count)] - 1
        valid[crossing] = False
        return np.flatnonzero(valid)

    @property
    def num_pairs(self) -> int:
        return int(self.pair_indices().size)

    def stacked(self, indices: np.ndarray, k: int) -> np.ndarray:
        """Frame stacks ending at ``indices``: (n, H, W, k*C) float32 in [0, 1].

        Frames before the episode start are replaced by the episode's first frame.
        """
        indices = np.asarray(indices, dtype=np.int64)
        if indices.size and (indices.min() < 0 or indices.max() >= self._count):
            raise InsufficientDataError(f"{self.domain}: frame index out of range")
        first = self.episode_start_of(indices)
        parts = [self._frames[np.maximum(indices - lag, first)] for lag in range(k - 1, -1, -1)]
        return np.concatenate(parts, axis=-1).astype(np.float32) / 255.0

    def labels(self, indices: np.ndarray) -> np.ndarray:
        if self._states is None:
            raise InsufficientDataError(f"{self.domain}: buffer carries no ground-truth states")
        return self._states[np.asarray(indices, dtype=np.int64)]

    def restore(
        self,
        frames: np.ndarray,
        episode_starts: list[int],
        states: np.ndarray | None,
    ) -> None:
        """Bulk load (used by the file codec)."""
        n = frames.shape[0]
        if n > self.capacity:
            raise CapacityExceededError(
                f"{self.domain}: {n} frames exceed capacity {self.capacity}"
            )
        self._frames[:n] = frames
        if states is not None:
            self._states = np.zeros((self.capacity, states.shape[1]), dtype=np.float64)
            self._states[:n] = states
        self.episode_starts = list(episode_starts)
        self._count = n
