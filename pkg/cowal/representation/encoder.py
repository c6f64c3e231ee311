"""
Tiny Encoder

Two-layer perceptron (ReLU hidden layer) mapping frame features to
embeddings, trained with NT-Xent on pairs of jittered views of the same
feature row. Checkpoints are stored as COWENC1 files.
"""

from __future__ import annotations

import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..data.io import read_raw, split_header, unpack_payload, write_raw
from ..data.types import EmbeddingMatrix, normalize_rows
from ..errors import BadParams, NonFinite, ShapeMismatch
from .ntxent import ContrastiveBatch, loss_and_grad

logger = logging.getLogger(__name__)

ENCODER_MAGIC = b"COWENC1"

ADAM_BETAS = (0.9, 0.999)
ADAM_EPS = 1e-8


class EncoderParams(BaseModel):
    """Training hyperparameters"""

    model_config = ConfigDict(extra="forbid")

    hidden_dim: int = Field(default=64, ge=1)
    embed_dim: int = Field(default=16, ge=1)
    epochs: int = Field(default=200, ge=1)
    lr: float = Field(default=3e-4, ge=0)
    batch_pairs: int = Field(default=256, ge=1)
    temperature: float = Field(default=0.5, gt=0)
    jitter: float = Field(default=0.1, ge=0)
    weight_decay: float = Field(default=1e-2, ge=0)


@dataclass
class TinyEncoder:
    """Weights and biases of the two layers"""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    loss_trace: list[float] = field(default_factory=list, compare=False)

    def __post_init__(self) -> None:
        self.w1 = np.asarray(self.w1, dtype=np.float64)
        self.b1 = np.asarray(self.b1, dtype=np.float64).reshape(-1)
        self.w2 = np.asarray(self.w2, dtype=np.float64)
        self.b2 = np.asarray(self.b2, dtype=np.float64).reshape(-1)
        if (
            self.w1.ndim != 2
            or self.w2.ndim != 2
            or self.w1.shape[1] != self.b1.size
            or self.w2.shape != (self.b1.size, self.b2.size)
        ):
            raise ShapeMismatch(
                f"inconsistent layer shapes {self.w1.shape}, {self.b1.shape}, "
                f"{self.w2.shape}, {self.b2.shape}"
            )
        if not all(np.all(np.isfinite(p)) for p in self.parameters()):
            raise NonFinite("encoder parameters must be finite")

    @property
    def sizes(self) -> tuple[int, int, int]:
        """(d_in, hidden, d_out)"""
        return self.w1.shape[0], self.w1.shape[1], self.w2.shape[1]

    def parameters(self) -> list[np.ndarray]:
        """Parameters in declaration order"""
        return [self.w1, self.b1, self.w2, self.b2]

    def forward(self, features: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Raw outputs and hidden activations"""
        features = np.asarray(features, dtype=np.float64)
        if features.ndim != 2 or features.shape[1] != self.sizes[0]:
            raise ShapeMismatch(
                f"encoder expects (n, {self.sizes[0]}) features, got {features.shape}"
            )
        hidden = np.maximum(features @ self.w1 + self.b1, 0.0)
        return hidden @ self.w2 + self.b2, hidden

    def backward(
        self, features: np.ndarray, hidden: np.ndarray, d_out: np.ndarray
    ) -> list[np.ndarray]:
        """Parameter gradients given the gradient at the raw outputs"""
        d_hidden = (d_out @ self.w2.T) * (hidden > 0)
        return [
            features.T @ d_hidden,
            d_hidden.sum(axis=0),
            hidden.T @ d_out,
            d_out.sum(axis=0),
        ]


def init_encoder(
    d_in: int, hidden: int, d_out: int, seed: int | np.random.SeedSequence = 0
) -> TinyEncoder:
    """He-normal weights, zero biases"""
    if min(d_in, hidden, d_out) < 1:
        raise BadParams(f"layer sizes must be positive, got {(d_in, hidden, d_out)}")
    rng = np.random.default_rng(seed)
    return TinyEncoder(
        w1=rng.normal(0.0, np.sqrt(2.0 / d_in), size=(d_in, hidden)),
        b1=np.zeros(hidden),
        w2=rng.normal(0.0, np.sqrt(2.0 / hidden), size=(hidden, d_out)),
        b2=np.zeros(d_out),
    )


def encode(encoder: TinyEncoder, features: np.ndarray) -> EmbeddingMatrix:
    """Embed features and normalize every row to unit length"""
    out, _ = encoder.forward(features)
    return EmbeddingMatrix(normalize_rows(out.astype(np.float32)))


def jitter_pairs(jitter: float) -> Callable[[np.ndarray, np.random.Generator], np.ndarray]:
    """Augmentation producing two Gaussian-jittered views per row, interleaved"""

    def sample(rows: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        views = np.repeat(rows, 2, axis=0)
        return views + rng.normal(0.0, jitter, size=views.shape)

    return sample


class _Adam:
    """Adam with decoupled weight decay on weight matrices"""

    def __init__(self, params: list[np.ndarray], lr: float, weight_decay: float):
        self.lr = lr
        self.weight_decay = weight_decay
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, params: list[np.ndarray], grads: list[np.ndarray]) -> None:
        beta1, beta2 = ADAM_BETAS
        self.t += 1
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= beta1
            m += (1 - beta1) * g
            v *= beta2
            v += (1 - beta2) * g * g
            m_hat = m / (1 - beta1**self.t)
            v_hat = v / (1 - beta2**self.t)
            if p.ndim == 2:
                p -= self.lr * self.weight_decay * p
            p -= self.lr * m_hat / (np.sqrt(v_hat) + ADAM_EPS)


def train_encoder(
    features: np.ndarray,
    params: EncoderParams | None = None,
    seed: int = 0,
    pair_sampler: Optional[Callable[[np.ndarray, np.random.Generator], np.ndarray]] = None,
    encoder: TinyEncoder | None = None,
) -> TinyEncoder:
    """
    Train an encoder with mini-batch Adam on NT-Xent

    Args:
        features: (n, d_in) feature rows, n >= batch_pairs
        params: Hyperparameters (defaults when omitted)
        seed: Seed for initialization, shuffling and augmentation
        pair_sampler: Maps (rows, rng) to 2*rows interleaved views; Gaussian jitter by default
        encoder: Starting point; He-normal init when omitted

    Returns:
        Trained encoder; loss_trace holds the mean loss of every epoch

    Raises:
        BadParams: Fewer rows than batch_pairs
        NonFinite: Training diverged
    """
    params = params or EncoderParams()
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2:
        raise ShapeMismatch(f"features must be 2-D, got shape {features.shape}")
    n = features.shape[0]
    if n < params.batch_pairs:
        raise BadParams(f"{n} feature rows for batches of {params.batch_pairs} pairs")

    init_seq, data_seq = np.random.SeedSequence(seed).spawn(2)
    if encoder is None:
        encoder = init_encoder(
            features.shape[1], params.hidden_dim, params.embed_dim, seed=init_seq
        )
    elif encoder.sizes[0] != features.shape[1]:
        raise ShapeMismatch(
            f"encoder takes {encoder.sizes[0]} inputs, features have {features.shape[1]}"
        )
    rng = np.random.default_rng(data_seq)
    sample = pair_sampler or jitter_pairs(params.jitter)
    optimizer = _Adam(encoder.parameters(), params.lr, params.weight_decay)

    trace: list[float] = []
    for epoch in range(params.epochs):
        order = rng.permutation(n)
        losses = []
        for start in range(0, n, params.batch_pairs):
            views = sample(features[order[start : start + params.batch_pairs]], rng)
            out, hidden = encoder.forward(views)
            loss, d_out = loss_and_grad(ContrastiveBatch(out, params.temperature))
            optimizer.step(encoder.parameters(), encoder.backward(views, hidden, d_out))
            losses.append(loss)
        trace.append(float(np.mean(losses)))
        if not all(np.all(np.isfinite(p)) for p in encoder.parameters()):
            raise NonFinite(f"encoder diverged in epoch {epoch}")
        logger.debug("epoch %d loss %.6f", epoch, trace[-1])

    logger.info(
        "trained encoder for %d epochs, loss %.4f -> %.4f", params.epochs, trace[0], trace[-1]
    )
    encoder.loss_trace = trace
    return encoder


def save_encoder(encoder: TinyEncoder, path: Path) -> None:
    """Write a COWENC1 checkpoint: layer sizes then f32 parameters in declaration order"""
    header = ENCODER_MAGIC + struct.pack("<III", *encoder.sizes)
    body = b"".join(p.astype("<f4").tobytes() for p in encoder.parameters())
    write_raw(path, header + body)


def load_encoder(path: Path) -> TinyEncoder:
    """Read a COWENC1 checkpoint"""
    raw = read_raw(Path(path))
    (d_in, hidden, d_out), body = split_header(raw, ENCODER_MAGIC, 3, path)
    shapes = [(d_in, hidden), (hidden,), (hidden, d_out), (d_out,)]
    values = unpack_payload(body, sum(int(np.prod(s)) for s in shapes), path)
    parts, offset = [], 0
    for shape in shapes:
        size = int(np.prod(shape))
        parts.append(values[offset : offset + size].reshape(shape))
        offset += size
    return TinyEncoder(*parts)
