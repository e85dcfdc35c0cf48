"""Soft actor-critic downstream learning on a frozen pre-trained encoder."""

from protolab.rlagent.downstream import (
    DownstreamResult,
    EvalRecord,
    encode_batch,
    evaluate_policy,
    evaluate_random_policy,
    load_agent,
    save_agent,
    train_downstream,
    write_eval_log,
)
from protolab.rlagent.replay import PixelBatch, ReplayBuffer
from protolab.rlagent.sac import EncodedBatch, EncodedTransition, SacAgent

__all__ = [
    "DownstreamResult",
    "EncodedBatch",
    "EncodedTransition",
    "EvalRecord",
    "PixelBatch",
    "ReplayBuffer",
    "SacAgent",
    "encode_batch",
    "evaluate_policy",
    "evaluate_random_policy",
    "load_agent",
    "save_agent",
    "train_downstream",
    "write_eval_log",
]
