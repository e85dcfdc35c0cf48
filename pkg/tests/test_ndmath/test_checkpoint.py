"""Binary checkpoint codec."""

from __future__ import annotations

import numpy as np
import pytest

from protolab.exceptions import BadMagicError, TruncatedFileError, VersionMismatchError
from protolab.ndmath import load_checkpoint, save_checkpoint
from protolab.ndmath.checkpoint import MAGIC


def test_round_trip_is_bitwise(tmp_path) -> None:
    tensors = {
        "a": np.random.default_rng(0).standard_normal((3, 4)).astype(np.float32),
        "b": np.arange(5, dtype=np.float64),
        "steps": np.array([7], dtype=np.int64),
        "raw": np.array([0, 255], dtype=np.uint8),
    }
    path = save_checkpoint(tmp_path / "x.ckpt", tensors, {"note": "hi", "dims": [3, 4]})
    ckpt = load_checkpoint(path)
    assert list(ckpt.tensors) == list(tensors)
    for name, array in tensors.items():
        assert ckpt.tensors[name].dtype == array.dtype
        assert ckpt.tensors[name].tobytes() == array.tobytes()
    assert ckpt.metadata == {"note": "hi", "dims": [3, 4]}


def test_file_starts_with_magic(tmp_path) -> None:
    path = save_checkpoint(tmp_path / "x.ckpt", {"a": np.zeros(2)})
    assert path.read_bytes().startswith(MAGIC)


def test_bad_magic(tmp_path) -> None:
    path = tmp_path / "bad.ckpt"
    path.write_bytes(b"NOTACKPT" + b"\x00" * 16)
    with pytest.raises(BadMagicError):
        load_checkpoint(path)


def test_version_mismatch(tmp_path) -> None:
    path = save_checkpoint(tmp_path / "x.ckpt", {"a": np.zeros(2)})
    raw = bytearray(path.read_bytes())
    raw[len(MAGIC)] = 99
    path.write_bytes(bytes(raw))
    with pytest.raises(VersionMismatchError):
        load_checkpoint(path)


def test_truncated(tmp_path) -> None:
    path = save_checkpoint(tmp_path / "x.ckpt", {"a": np.arange(10.0)})
    path.write_bytes(path.read_bytes()[:-5])
    with pytest.raises(TruncatedFileError):
        load_checkpoint(path)
