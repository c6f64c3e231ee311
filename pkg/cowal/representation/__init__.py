"""
Representation Package

Contrastive loss and the tiny encoder that produces frame embeddings
"""

from .encoder import (
    EncoderParams,
    TinyEncoder,
    encode,
    init_encoder,
    load_encoder,
    save_encoder,
    train_encoder,
)
from .ntxent import ContrastiveBatch, ntxent_grad, ntxent_loss

__all__ = [
    "ContrastiveBatch",
    "EncoderParams",
    "TinyEncoder",
    "encode",
    "init_encoder",
    "load_encoder",
    "ntxent_grad",
    "ntxent_loss",
    "save_encoder",
    "train_encoder",
]
