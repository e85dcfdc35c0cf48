"""Random-shift image augmentation."""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from protolab.exceptions import PadTooLargeError


def augment_shift(
    frames: np.ndarray,
    pad: int,
    seed: int | np.random.Generator,
) -> np.ndarray:
    """Edge-pad each (H, W, C) image by ``pad`` and crop a random H x W window.

    ``frames`` is a batch (B, H, W, C); the output has the same shape and dtype.
    """
    frames = np.asarray(frames)
    if frames.ndim != 4:
        raise ValueError(f"augment_shift expects (B, H, W, C) frames, got {frames.shape}")
    b, h, w, _ = frames.shape
    if pad < 0:
        raise ValueError(f"pad must be non-negative, got {pad}")
    if pad >= min(h, w):
        raise PadTooLargeError(f"pad {pad} must be smaller than the image size {min(h, w)}")
    if pad == 0:
        return frames.copy()

    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    padded = np.pad(frames, ((0, 0), (pad, pad), (pad, pad), (0, 0)), mode="edge")
    dy = rng.integers(0, 2 * pad + 1, size=b)
    dx = rng.integers(0, 2 * pad + 1, size=b)
    # (B, 2p+1, 2p+1, C, H, W)
    windows = sliding_window_view(padded, (h, w), axis=(1, 2))
    crops = windows[np.arange(b), dy, dx]
    return np.ascontiguousarray(np.moveaxis(crops, 1, -1))
