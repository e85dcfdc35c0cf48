"""Cluster-assignment targets by a fixed number of Sinkhorn-Knopp sweeps.

Scores between next-frame embeddings and prototypes are made strictly positive with
exp(C / epsilon) and then doubly normalized a fixed number of times (one row pass,
then one column pass per sweep). Everything here works on plain arrays, so no gradient
can reach the targets.

For a B x M matrix (B samples, M prototypes) rows are normalized to mass 1/B and
columns to mass 1/M; the square case B = M is the usual one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from protolab.exceptions import NonPositiveError, NotNormalizedError, ScoreOverflowError

NORM_TOLERANCE = 1e-6
MAX_EXPONENT = 700.0
DEFAULT_EPSILON = 0.05
DEFAULT_ITERATIONS = 3


def _check_unit(name: str, vectors: np.ndarray) -> None:
    norms = np.linalg.norm(vectors, axis=-1)
    bad = np.abs(norms - 1.0) > NORM_TOLERANCE
    if bad.any():
        worst = float(norms[bad][np.argmax(np.abs(norms[bad] - 1.0))])
        raise NotNormalizedError(f"{name} must be unit vectors (found norm {worst:.6g})")


def score_matrix(embeddings: np.ndarray, prototypes: np.ndarray) -> np.ndarray:
    """C_ij = z_i . c_j for unit embeddings (B, d) and unit prototypes (M, d)."""
    embeddings = np.atleast_2d(np.asarray(embeddings, dtype=np.float64))
    prototypes = np.atleast_2d(np.asarray(prototypes, dtype=np.float64))
    _check_unit("embeddings", embeddings)
    _check_unit("prototypes", prototypes)
    return embeddings @ prototypes.T


def positify(scores: np.ndarray, epsilon: float = DEFAULT_EPSILON) -> np.ndarray:
    """Elementwise exp(C / epsilon)."""
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    scaled = np.asarray(scores, dtype=np.float64) / epsilon
    if scaled.size and scaled.max() > MAX_EXPONENT:
        raise ScoreOverflowError(
            f"exp(C / epsilon) overflows: max exponent {scaled.max():.1f} > {MAX_EXPONENT:.0f}"
        )
    return np.exp(scaled)


def _require_positive(matrix: np.ndarray) -> None:
    if (matrix <= 0).any():
        raise NonPositiveError("row/column normalization needs strictly positive entries")


def row_norm(matrix: np.ndarray, m: int | None = None) -> np.ndarray:
    """Divide each row by m times its sum; every row then sums to 1/m (m defaults to #rows)."""
    matrix = np.asarray(matrix, dtype=np.float64)
    _require_positive(matrix)
    m = matrix.shape[0] if m is None else m
    return matrix / (m * matrix.sum(axis=1, keepdims=True))


def col_norm(matrix: np.ndarray, m: int | None = None) -> np.ndarray:
    """Divide each column by m times its sum; every column then sums to 1/m (default m: #cols)."""
    matrix = np.asarray(matrix, dtype=np.float64)
    _require_positive(matrix)
    m = matrix.shape[1] if m is None else m
    return matrix / (m * matrix.sum(axis=0, keepdims=True))


def dou(matrix: np.ndarray) -> np.ndarray:
    """One doubly-normalization: a row pass followed by a column pass."""
    return col_norm(row_norm(matrix))


@dataclass
class TargetMatrix:
    """Non-negative transport plan; column sums are exact, row sums approximate."""
    entries: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    def rows(self, renormalize: bool = True) -> np.ndarray:
        """Per-sample targets q; rescaled to sum to 1 unless ``renormalize`` is False."""
        if not renormalize:
            return self.entries
        return self.entries / self.entries.sum(axis=1, keepdims=True)


def assignment_targets(
    scores: np.ndarray,
    iterations: int = DEFAULT_ITERATIONS,
    epsilon: float = DEFAULT_EPSILON,
) -> TargetMatrix:
    """``iterations`` doubly-normalizations of exp(C / epsilon)."""
    if iterations < 1:
        raise ValueError(f"iterations must be at least 1, got {iterations}")
    plan = positify(scores, epsilon)
    for _ in range(iterations):
        plan = dou(plan)
    return TargetMatrix(plan)
