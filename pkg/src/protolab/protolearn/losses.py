"""Assignment probabilities and the self-supervised objective.

L_SSL = L_comp + alpha * L_intr, where L_comp is the cross-entropy between predicted
assignments p and Sinkhorn targets q, and L_intr pushes normalized prototypes apart.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from protolab.config import SslConfig
from protolab.exceptions import DegenerateDenominatorError, ShapeMismatchError
from protolab.ndmath import ops
from protolab.ndmath.tensor import Tensor, detach
from protolab.protolearn.networks import PrototypeBank
from protolab.sinkhorn import TargetMatrix

PROB_FLOOR = 1e-12
DENOMINATOR_FLOOR = 1e-6


def _prototype_view(bank: PrototypeBank | Tensor) -> Tensor:
    return bank.normalized() if isinstance(bank, PrototypeBank) else bank


def assign_probs(u: Tensor, bank: PrototypeBank | Tensor, tau: float) -> Tensor:
    """p = softmax(u_hat . c_hat / tau) over prototypes, one row per sample."""
    if tau <= 0:
        raise ValueError(f"temperature must be positive, got {tau}")
    c_hat = _prototype_view(bank)
    u_hat = ops.l2_normalize(u, axis=-1)
    if u_hat.ndim == 1:
        u_hat = ops.reshape(u_hat, (1, u_hat.shape[0]))
    return ops.softmax(ops.matmul(u_hat, c_hat.T) / tau, axis=-1)


def comparative_loss(p: Tensor, targets: TargetMatrix | np.ndarray) -> Tensor:
    """-(1/B) sum_i q_i . log p_i, with log floored at 1e-12."""
    q = targets.rows() if isinstance(targets, TargetMatrix) else np.asarray(targets)
    if q.shape != p.shape:
        raise ShapeMismatchError(f"targets {q.shape} vs probabilities {p.shape}")
    log_p = ops.log(p, floor=PROB_FLOOR)
    return -ops.sum(log_p * q.astype(p.dtype, copy=False)) / float(p.shape[0])


def intrinsic_loss(bank: PrototypeBank | Tensor, w: float) -> Tensor:
    """sum_{j != k} det(c_j) . c_k / (det(c_j . c_k) + w).

    Both the left factor and the denominator are constants, so term (j, k) only moves c_k.
    """
    c_hat = _prototype_view(bank)
    fixed = detach(c_hat)
    cosine = fixed.data @ fixed.data.T
    off_diagonal = ~np.eye(cosine.shape[0], dtype=bool)
    denominator = cosine + w
    if (denominator[off_diagonal] < DENOMINATOR_FLOOR).any():
        raise DegenerateDenominatorError(
            f"cosine + w fell below {DENOMINATOR_FLOOR} (w = {w})"
        )
    weights = np.where(off_diagonal, 1.0 / np.where(off_diagonal, denominator, 1.0), 0.0)
    return ops.sum(ops.matmul(fixed, c_hat.T) * weights.astype(c_hat.dtype, copy=False))


@dataclass
class LossTerms:
    comparative: Tensor
    intrinsic: Tensor
    total: Tensor

    def values(self) -> tuple[float, float, float]:
        return self.comparative.item(), self.intrinsic.item(), self.total.item()


def loss_terms(
    p: Tensor,
    targets: TargetMatrix | np.ndarray,
    bank: PrototypeBank | Tensor,
    config: SslConfig,
) -> LossTerms:
    comp = comparative_loss(p, targets)
    intr = intrinsic_loss(bank, config.intrinsic_weight)
    if config.intrinsic_coef == 0:
        total = comp
    else:
        total = comp + intr * config.intrinsic_coef
    return LossTerms(comparative=comp, intrinsic=intr, total=total)


def ssl_loss(
    p: Tensor,
    targets: TargetMatrix | np.ndarray,
    bank: PrototypeBank | Tensor,
    config: SslConfig,
) -> Tensor:
    """L_comp + alpha * L_intr."""
    return loss_terms(p, targets, bank, config).total
