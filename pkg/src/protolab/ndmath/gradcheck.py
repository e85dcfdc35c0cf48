"""Central finite-difference verification of tape gradients."""

from __future__ import annotations

import logging
from collections.abc import Callable

import numpy as np

from protolab.exceptions import NonFiniteError
from protolab.ndmath.params import ParamSet
from protolab.ndmath.tensor import Tape, Tensor

logger = logging.getLogger(__name__)


def _evaluate(fn: Callable[[], Tensor]) -> float:
    value = float(np.asarray(fn().data).reshape(()))
    if not np.isfinite(value):
        raise NonFiniteError("function value is not finite")
    return value


def grad_check(fn: Callable[[], Tensor], params: ParamSet, eps: float = 1e-6) -> float:
    """Max over all parameter scalars of |analytic - numeric| / max(1, |analytic|).

    ``fn`` must rebuild its scalar output from the tensors in ``params`` on every call.
    Parameter values are restored exactly after each perturbation.
    """
    params.zero_grad()
    with Tape() as tape:
        loss = fn()
    if not np.isfinite(loss.data).all():
        raise NonFiniteError("function value is not finite")
    tape.backward(loss)
    analytic = {name: params.grad(name).copy() for name in params}

    worst = 0.0
    for name, tensor in params.items():
        flat = tensor.data.reshape(-1)
        grad_flat = analytic[name].reshape(-1)
        for i in range(flat.size):
            original = flat[i]
            flat[i] = original + eps
            plus = _evaluate(fn)
            flat[i] = original - eps
            minus = _evaluate(fn)
            flat[i] = original
            numeric = (plus - minus) / (2.0 * eps)
            err = abs(grad_flat[i] - numeric) / max(1.0, abs(grad_flat[i]))
            worst = max(worst, float(err))
    logger.debug("grad_check over %d scalars: max rel err %.3e", params.num_scalars(), worst)
    return worst
