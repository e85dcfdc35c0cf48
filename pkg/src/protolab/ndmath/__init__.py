"""Minimal numeric core: tensors, a reverse-mode tape, layers, Adam and checkpoints."""

from __future__ import annotations

import numpy as np

from protolab.ndmath import ops
from protolab.ndmath.checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from protolab.ndmath.gradcheck import grad_check
from protolab.ndmath.layers import MLP, Conv2d, LayerNorm, Linear, Module
from protolab.ndmath.optim import Adam, OptimizerState
from protolab.ndmath.params import ParamSet, ema_update
from protolab.ndmath.tensor import Tape, Tensor, detach, no_tape


def l2_normalize(v: Tensor | np.ndarray, axis: int = -1) -> Tensor | np.ndarray:
    """Unit-norm vectors along ``axis``; tensors stay on the tape, arrays stay arrays."""
    if isinstance(v, Tensor):
        return ops.l2_normalize(v, axis=axis)
    return ops.unit_rows(np.asarray(v), axis=axis)


__all__ = [
    "Adam",
    "Checkpoint",
    "Conv2d",
    "LayerNorm",
    "Linear",
    "MLP",
    "Module",
    "OptimizerState",
    "ParamSet",
    "Tape",
    "Tensor",
    "detach",
    "ema_update",
    "grad_check",
    "l2_normalize",
    "load_checkpoint",
    "no_tape",
    "ops",
    "save_checkpoint",
]
