"""Prototype coverage statistics (lower means the prototypes spread wider)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from protolab.exceptions import TooFewPrototypesError
from protolab.ndmath.ops import unit_rows

if TYPE_CHECKING:
    from protolab.protolearn.networks import PrototypeBank


@dataclass(frozen=True)
class CoverageReport:
    ane: float  # mean cosine over all ordered pairs j != k
    kne: float  # mean cosine to the k-th most similar other prototype
    k: int


def coverage(bank: PrototypeBank | np.ndarray, k: int = 3) -> CoverageReport:
    raw = bank if isinstance(bank, np.ndarray) else bank.raw.data
    c_hat = unit_rows(np.asarray(raw, dtype=np.float64), axis=1)
    m = c_hat.shape[0]
    if k < 1 or m <= k:
        raise TooFewPrototypesError(f"coverage with k={k} needs more than {k} prototypes, got {m}")
    cosine = c_hat @ c_hat.T
    off_diagonal = ~np.eye(m, dtype=bool)
    others = cosine[off_diagonal].reshape(m, m - 1)
    ane = float(others.mean())
    kth = -np.sort(-others, axis=1)[:, k - 1]
    return CoverageReport(ane=ane, kne=float(kth.mean()), k=k)
