"""Efficient prototypical learning: augmentation, networks, losses and training loops."""

from protolab.protolearn.augment import augment_shift
from protolab.protolearn.losses import (
    LossTerms,
    assign_probs,
    comparative_loss,
    intrinsic_loss,
    loss_terms,
    ssl_loss,
)
from protolab.protolearn.networks import EncoderSpec, EncoderStack, PrototypeBank, to_nchw
from protolab.protolearn.trainer import (
    PretrainRecord,
    PretrainResult,
    PrototypeLearner,
    choose_buffer,
    finetune,
    init_models,
    load_encoder,
    pretrain,
    save_encoder,
    write_pretrain_log,
)

__all__ = [
    "EncoderSpec",
    "EncoderStack",
    "LossTerms",
    "PretrainRecord",
    "PretrainResult",
    "PrototypeBank",
    "PrototypeLearner",
    "assign_probs",
    "augment_shift",
    "choose_buffer",
    "comparative_loss",
    "finetune",
    "init_models",
    "intrinsic_loss",
    "load_encoder",
    "loss_terms",
    "pretrain",
    "save_encoder",
    "ssl_loss",
    "to_nchw",
    "write_pretrain_log",
]
