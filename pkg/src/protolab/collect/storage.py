"""Buffer file codec.

Layout (little-endian): b"CRPTBUF", u32 version, u32 name length + UTF-8 domain name,
u32 H, W, C, u64 frame count, u64 capacity, i64 collection seed, u64 episode-start count +
u64 indices, raw uint8 frames, then u8 state flag and (if set) u32 dimension + float64 rows.
"""

from __future__ import annotations

import logging
import os
import struct
from pathlib import Path
from typing import BinaryIO

import numpy as np

from protolab.collect.buffer import DomainBuffer
from protolab.exceptions import (
    BadMagicError,
    BufferFormatError,
    StorageIOError,
    TruncatedFileError,
    VersionMismatchError,
)
from protolab.ndmath.checkpoint import read_exact

logger = logging.getLogger(__name__)

MAGIC = b"CRPTBUF"
VERSION = 1


def save_buffer(buffer: DomainBuffer, path: str | Path) -> Path:
    path = Path(path)
    name = buffer.domain.encode("utf-8")
    h, w, c = buffer.frame_shape
    starts = np.asarray(buffer.episode_starts, dtype="<u8")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack("<II", VERSION, len(name)))
            fh.write(name)
            fh.write(struct.pack("<IIIQQq", h, w, c, len(buffer), buffer.capacity, buffer.seed))
            fh.write(struct.pack("<Q", starts.size))
            fh.write(starts.tobytes())
            fh.write(np.ascontiguousarray(buffer.frames).tobytes())
            states = buffer.states
            if states is None:
                fh.write(struct.pack("<B", 0))
            else:
                fh.write(struct.pack("<BI", 1, states.shape[1]))
                fh.write(np.ascontiguousarray(states, dtype="<f8").tobytes())
    except OSError as e:
        raise StorageIOError(f"cannot write buffer {path}: {e}") from e
    logger.debug("Saved %s buffer (%d frames) to %s", buffer.domain, len(buffer), path)
    return path


def _require(fh: BinaryIO, n: int, what: str) -> None:
    """Refuse a declared size larger than what is left of the file, before reading it."""
    remaining = os.fstat(fh.fileno()).st_size - fh.tell()
    if n > remaining:
        raise TruncatedFileError(f"{what} declares {n} bytes but only {remaining} remain")


def load_buffer(path: str | Path) -> DomainBuffer:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            if fh.read(len(MAGIC)) != MAGIC:
                raise BadMagicError(f"{path} is not a buffer file")
            version, name_len = struct.unpack("<II", read_exact(fh, 8, "header"))
            if version != VERSION:
                raise VersionMismatchError(f"{path}: buffer version {version}, want {VERSION}")
            _require(fh, name_len, "domain name")
            domain = read_exact(fh, name_len, "domain name").decode("utf-8")
            h, w, c, count, capacity, seed = struct.unpack(
                "<IIIQQq", read_exact(fh, 36, "frame header")
            )
            if count > capacity:
                raise BufferFormatError(f"{path}: {count} frames exceed capacity {capacity}")
            (n_starts,) = struct.unpack("<Q", read_exact(fh, 8, "episode index"))
            _require(fh, 8 * n_starts + count * h * w * c + 1, "episode index and frames")
            starts = np.frombuffer(read_exact(fh, 8 * n_starts, "episode index"), dtype="<u8")
            raw = read_exact(fh, count * h * w * c, "frames")
            frames = np.frombuffer(raw, dtype=np.uint8).reshape(count, h, w, c)
            (has_states,) = struct.unpack("<B", read_exact(fh, 1, "state flag"))
            states = None
            if has_states:
                (dim,) = struct.unpack("<I", read_exact(fh, 4, "state header"))
                _require(fh, 8 * count * dim, "states")
                values = read_exact(fh, 8 * count * dim, "states")
                states = np.frombuffer(values, dtype="<f8").reshape(count, dim)
    except OSError as e:
        raise StorageIOError(f"cannot read buffer {path}: {e}") from e

    if starts.size and int(starts.max()) >= count:
        raise BufferFormatError(f"{path}: episode start beyond {count} frames")
    try:
        buffer = DomainBuffer(
            domain, int(capacity), (h, w, c), seed=int(seed),
            state_dim=None if states is None else states.shape[1],
        )
    except (MemoryError, ValueError) as e:
        raise BufferFormatError(f"{path}: cannot allocate capacity {capacity}: {e}") from e
    buffer.restore(frames, [int(s) for s in starts], states)
    return buffer
