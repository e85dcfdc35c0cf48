"""Linear state probe: ridge regression from frozen embeddings to ground-truth state."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from scipy import linalg

from protolab.exceptions import InsufficientDataError

if TYPE_CHECKING:
    from protolab.collect import DomainBuffer
    from protolab.protolearn.networks import EncoderStack

MIN_LABELED = 200
TRAIN_FRACTION = 0.8


@dataclass(frozen=True)
class ProbeResult:
    mse: float
    n_train: int
    n_test: int
    domain: str = ""


def ridge_probe(
    features: np.ndarray,
    targets: np.ndarray,
    *,
    ridge: float = 1e-6,
    seed: int = 0,
    train_fraction: float = TRAIN_FRACTION,
) -> ProbeResult:
    """Held-out MSE of a ridge fit with centered data and an unpenalized intercept."""
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(targets, dtype=np.float64)
    if y.ndim == 1:
        y = y[:, None]
    n = x.shape[0]
    if n != y.shape[0]:
        raise ValueError(f"{n} feature rows vs {y.shape[0]} target rows")
    n_train = int(round(train_fraction * n))
    if n_train < 1 or n_train >= n:
        raise InsufficientDataError(f"cannot split {n} samples {train_fraction:.0%}/rest")

    order = np.random.default_rng(seed).permutation(n)
    train, test = order[:n_train], order[n_train:]
    x_mean, y_mean = x[train].mean(axis=0), y[train].mean(axis=0)
    xc = x[train] - x_mean
    gram = xc.T @ xc + ridge * np.eye(x.shape[1])
    weights = linalg.solve(gram, xc.T @ (y[train] - y_mean), assume_a="sym")
    predictions = (x[test] - x_mean) @ weights + y_mean
    mse = float(np.mean((predictions - y[test]) ** 2))
    return ProbeResult(mse=mse, n_train=n_train, n_test=n - n_train)


def linear_probe(
    buffer: DomainBuffer,
    stack: EncoderStack,
    *,
    ridge: float = 1e-3,
    seed: int = 0,
    frame_stack: int = 3,
) -> ProbeResult:
    """Probe the encoder f on every labeled frame of ``buffer``."""
    if buffer.states is None or len(buffer) < MIN_LABELED:
        raise InsufficientDataError(
            f"{buffer.domain}: linear probe needs {MIN_LABELED} labeled frames, "
            f"have {0 if buffer.states is None else len(buffer)}"
        )
    frames = buffer.stacked(np.arange(len(buffer)), frame_stack)
    result = ridge_probe(stack.embed(frames), buffer.states, ridge=ridge, seed=seed)
    return ProbeResult(
        mse=result.mse, n_train=result.n_train, n_test=result.n_test, domain=buffer.domain,
    )
