"""Principal components of encoder embeddings, for plotting domains side by side."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from scipy import linalg

from protolab.exceptions import RankDeficientError

if TYPE_CHECKING:
    from protolab.collect import DomainBuffer
    from protolab.protolearn.networks import EncoderStack

logger = logging.getLogger(__name__)


@dataclass
class PcaResult:
    projections: np.ndarray        # (n, components)
    explained_variance: np.ndarray  # eigenvalues, descending
    ratios: np.ndarray             # explained variance ratios, descending
    domains: list[str] | None = None


def principal_components(embeddings: np.ndarray, components: int) -> PcaResult:
    """Top ``components`` directions of the sample covariance (ddof = 1)."""
    x = np.asarray(embeddings, dtype=np.float64)
    n, dim = x.shape
    if components < 1:
        raise ValueError(f"components must be positive, got {components}")
    if components > dim:
        raise RankDeficientError(f"{dim} embedding dimensions cannot span {components} components")
    if n <= components:
        raise RankDeficientError(f"{n} samples cannot span {components} components")
    centered = x - x.mean(axis=0)
    cov = centered.T @ centered / (n - 1)
    values, vectors = linalg.eigh(cov)
    values, vectors = values[::-1], vectors[:, ::-1]
    tol = max(values[0], 0.0) * max(n, dim) * np.finfo(np.float64).eps
    rank = int((values > tol).sum()) if values[0] > 0 else 0
    if rank < components:
        raise RankDeficientError(f"covariance has rank {rank}, {components} components requested")

    top = vectors[:, :components]
    # Fix each direction's sign so the largest loading is positive.
    pivots = np.argmax(np.abs(top), axis=0)
    top = top * np.sign(top[pivots, np.arange(components)])
    total = float(np.trace(cov))
    return PcaResult(
        projections=centered @ top,
        explained_variance=values[:components].copy(),
        ratios=values[:components] / total,
    )


def pca_project(
    frames: np.ndarray, stack: EncoderStack, components: int = 4,
) -> PcaResult:
    """Encode stacked frames with f and project onto their principal components."""
    return principal_components(stack.embed(frames), components)


def pca_buffers(
    buffers: Sequence[DomainBuffer],
    stack: EncoderStack,
    components: int = 4,
    *,
    per_domain: int = 500,
    frame_stack: int = 3,
    seed: int = 0,
) -> PcaResult:
    """Joint PCA over a sample of frames from each buffer; rows tagged by domain."""
    rng = np.random.default_rng(seed)
    tags: list[str] = []
    parts = []
    for buf in buffers:
        take = min(per_domain, len(buf))
        idx = np.sort(rng.choice(len(buf), size=take, replace=False))
        parts.append(buf.stacked(idx, frame_stack))
        tags.extend([buf.domain] * take)
    frames = np.concatenate(parts, axis=0)
    result = pca_project(frames, stack, components)
    result.domains = tags
    logger.info(
        "PCA over %d frames from %d domain(s): ratios %s",
        len(tags), len(buffers), np.array2string(result.ratios, precision=3),
    )
    return result
