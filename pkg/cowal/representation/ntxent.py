"""
NT-Xent Contrastive Loss

Normalized temperature-scaled cross-entropy over positive pairs with all
other batch rows as negatives, plus its analytic gradient. Rows 2j and
2j+1 form the j-th positive pair; the loss is averaged over all 2N anchors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp, softmax

from ..errors import DegenerateBatch, NonFinite


@dataclass(frozen=True)
class ContrastiveBatch:
    """2N embedding rows in positive pairs and a temperature"""

    views: np.ndarray
    temperature: float = 0.5

    def __post_init__(self) -> None:
        views = np.asarray(self.views, dtype=np.float64)
        if views.ndim != 2 or views.shape[0] == 0 or views.shape[0] % 2:
            raise DegenerateBatch(f"need an even, nonzero number of rows, got shape {views.shape}")
        if not np.all(np.isfinite(views)):
            raise NonFinite("batch contains NaN or infinite values")
        if not self.temperature > 0:
            raise DegenerateBatch(f"temperature must be positive, got {self.temperature}")
        if np.any(np.linalg.norm(views, axis=1) == 0):
            raise DegenerateBatch("batch contains a zero row")
        object.__setattr__(self, "views", views)

    @property
    def pairs(self) -> int:
        return self.views.shape[0] // 2

    @property
    def partners(self) -> np.ndarray:
        """Row index of every row's positive"""
        return np.arange(self.views.shape[0]) ^ 1


def _logits(b: ContrastiveBatch) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    norms = np.linalg.norm(b.views, axis=1)
    unit = b.views / norms[:, None]
    logits = unit @ unit.T / b.temperature
    np.fill_diagonal(logits, -np.inf)
    return logits, unit, norms


def ntxent_loss(b: ContrastiveBatch) -> float:
    """Mean NT-Xent loss over all 2N anchors"""
    logits, _, _ = _logits(b)
    rows = np.arange(len(logits))
    per_anchor = logsumexp(logits, axis=1) - logits[rows, b.partners]
    loss = float(per_anchor.mean())
    if not np.isfinite(loss):
        raise NonFinite("NT-Xent loss is not finite")
    return max(loss, 0.0)


def ntxent_grad(b: ContrastiveBatch) -> np.ndarray:
    """
    Gradient of the mean loss with respect to every batch row

    Includes the Jacobian of the cosine normalization, so the result is
    orthogonal to each input row.
    """
    logits, unit, norms = _logits(b)
    rows = np.arange(len(logits))
    g = softmax(logits, axis=1)
    g[rows, b.partners] -= 1.0
    g /= len(logits)

    d_unit = (g + g.T) @ unit / b.temperature
    radial = np.sum(d_unit * unit, axis=1, keepdims=True)
    grad = (d_unit - radial * unit) / norms[:, None]
    if not np.all(np.isfinite(grad)):
        raise NonFinite("NT-Xent gradient is not finite")
    return grad


def loss_and_grad(b: ContrastiveBatch) -> tuple[float, np.ndarray]:
    return ntxent_loss(b), ntxent_grad(b)
