"""Binary checkpoint codec.

Layout (all integers little-endian):
    b"CRPTCKPT", u32 version, u32 entry count, then per entry
    u32 name length, UTF-8 name, u8 dtype code, u32 ndim, u64 extents..., raw data.
JSON metadata travels as a u8 entry named ``__meta__``.
"""

from __future__ import annotations

import json
import struct
from collections.abc import Mapping
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, BinaryIO

import numpy as np

from protolab.exceptions import (
    BadMagicError,
    StorageIOError,
    TruncatedFileError,
    VersionMismatchError,
)

MAGIC = b"CRPTCKPT"
VERSION = 1
META_KEY = "__meta__"

_DTYPES: dict[int, np.dtype] = {
    0: np.dtype("<f4"),
    1: np.dtype("<f8"),
    2: np.dtype("<i8"),
    3: np.dtype("u1"),
}
_CODES = {dt: code for code, dt in _DTYPES.items()}


@dataclass
class Checkpoint:
    tensors: dict[str, np.ndarray]
    metadata: dict[str, Any] = field(default_factory=dict)


def read_exact(fh: BinaryIO, n: int, what: str) -> bytes:
    raw = fh.read(n)
    if len(raw) != n:
        raise TruncatedFileError(f"file ends inside {what}")
    return raw


def write_tensors(fh: BinaryIO, tensors: Mapping[str, np.ndarray]) -> None:
    fh.write(struct.pack("<I", len(tensors)))
    for name, array in tensors.items():
        array = np.asarray(array)
        code = _CODES.get(array.dtype.newbyteorder("<"))
        if code is None:
            raise ValueError(f"{name}: unsupported dtype {array.dtype}")
        encoded = name.encode("utf-8")
        fh.write(struct.pack("<I", len(encoded)))
        fh.write(encoded)
        fh.write(struct.pack("<BI", code, array.ndim))
        fh.write(struct.pack(f"<{array.ndim}Q", *array.shape))
        fh.write(np.ascontiguousarray(array, dtype=_DTYPES[code]).tobytes())


def read_tensors(fh: BinaryIO) -> dict[str, np.ndarray]:
    (count,) = struct.unpack("<I", read_exact(fh, 4, "entry count"))
    tensors: dict[str, np.ndarray] = {}
    for _ in range(count):
        (name_len,) = struct.unpack("<I", read_exact(fh, 4, "entry name"))
        name = read_exact(fh, name_len, "entry name").decode("utf-8")
        code, ndim = struct.unpack("<BI", read_exact(fh, 5, f"{name} header"))
        if code not in _DTYPES:
            raise BadMagicError(f"{name}: unknown dtype code {code}")
        shape = struct.unpack(f"<{ndim}Q", read_exact(fh, 8 * ndim, f"{name} shape"))
        dtype = _DTYPES[code]
        nbytes = int(np.prod(shape, dtype=np.int64)) * dtype.itemsize
        raw = read_exact(fh, nbytes, f"{name} data")
        tensors[name] = np.frombuffer(raw, dtype=dtype).reshape(shape).copy()
    return tensors


def save_checkpoint(
    path: str | Path,
    tensors: Mapping[str, np.ndarray],
    metadata: Mapping[str, Any] | None = None,
) -> Path:
    path = Path(path)
    entries = dict(tensors)
    if metadata:
        blob = json.dumps(dict(metadata), sort_keys=True).encode("utf-8")
        entries[META_KEY] = np.frombuffer(blob, dtype=np.uint8)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack("<I", VERSION))
            write_tensors(fh, entries)
    except OSError as e:
        raise StorageIOError(f"cannot write checkpoint {path}: {e}") from e
    return path


def load_checkpoint(path: str | Path) -> Checkpoint:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            magic = fh.read(len(MAGIC))
            if magic != MAGIC:
                raise BadMagicError(f"{path} is not a checkpoint file")
            raw_version = fh.read(4)
            if len(raw_version) != 4:
                raise TruncatedFileError(f"{path}: file ends inside the version field")
            (version,) = struct.unpack("<I", raw_version)
            if version != VERSION:
                raise VersionMismatchError(f"{path}: checkpoint version {version}, want {VERSION}")
            tensors = read_tensors(fh)
    except OSError as e:
        raise StorageIOError(f"cannot read checkpoint {path}: {e}") from e
    metadata: dict[str, Any] = {}
    if META_KEY in tensors:
        metadata = json.loads(tensors.pop(META_KEY).tobytes().decode("utf-8"))
    return Checkpoint(tensors=tensors, metadata=metadata)
