"""Linear scattering head: time pooling, log compression, affine map."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..tfr import TFRMatrix

__all__ = ["LOG_OFFSET", "ClassifierHead", "pool_features", "forward_head", "head_logits",
           "softmax", "cross_entropy", "head_gradient", "predict"]

LOG_OFFSET = 0.1


@dataclass
class ClassifierHead:
    weights: np.ndarray  # (F_out, n_classes)
    bias: np.ndarray  # (n_classes,)
    log_offset: float = LOG_OFFSET

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64).copy()
        self.bias = np.asarray(self.bias, dtype=np.float64).copy()
        if self.weights.ndim != 2 or self.bias.shape != (self.weights.shape[1],):
            raise ValueError("weights must be (F_out, n_classes) and bias (n_classes,)")
        if not self.log_offset > 0:
            raise ValueError("log_offset must be positive")
        if not (np.all(np.isfinite(self.weights)) and np.all(np.isfinite(self.bias))):
            raise ValueError("head parameters must be finite")

    @classmethod
    def init(cls, n_freq: int, n_classes: int, seed: int, scale: float = 0.01) -> "ClassifierHead":
        rng = np.random.default_rng(seed)
        return cls(scale * rng.standard_normal((n_freq, n_classes)), np.zeros(n_classes))

    @property
    def n_classes(self) -> int:
        return self.bias.size


def pool_features(pooled: np.ndarray, log_offset: float = LOG_OFFSET) -> np.ndarray:
    """``log(mean_t K + offset)`` from time-pooled values."""
    pooled = np.asarray(pooled, dtype=np.float64)
    z = pooled + log_offset
    if np.any(z <= 0):
        raise ValueError("non-positive pooled feature: K is pathological "
                         f"(min pooled value {pooled.min():.3g})")
    return np.log(z)


def head_logits(features: np.ndarray, head: ClassifierHead) -> np.ndarray:
    return features @ head.weights + head.bias


def forward_head(k: TFRMatrix | np.ndarray, head: ClassifierHead) -> np.ndarray:
    """Logits of one representation: pool over time, log, affine."""
    v = np.asarray(k.values if isinstance(k, TFRMatrix) else k, dtype=np.float64)
    if v.ndim != 2 or v.shape[1] != head.weights.shape[0]:
        raise ValueError(f"K of shape {v.shape} does not match head with "
                         f"{head.weights.shape[0]} frequency inputs")
    # sorting first fixes the summation order, so any time permutation of K
    # gives bit-identical logits
    return head_logits(pool_features(np.sort(v, axis=0).mean(axis=0), head.log_offset), head)


def softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def cross_entropy(logits: np.ndarray, labels: np.ndarray) -> float:
    """Mean softmax cross-entropy."""
    z = logits - logits.max(axis=1, keepdims=True)
    lse = np.log(np.exp(z).sum(axis=1))
    return float(np.mean(lse - z[np.arange(labels.size), labels]))


def head_gradient(features: np.ndarray, labels: np.ndarray, head: ClassifierHead):
    """Closed-form gradient of the mean cross-entropy w.r.t. weights and bias."""
    p = softmax(head_logits(features, head))
    p[np.arange(labels.size), labels] -= 1.0
    p /= labels.size
    return features.T @ p, p.sum(axis=0)


def predict(logits: np.ndarray) -> np.ndarray:
    """Argmax class; ``np.argmax`` breaks ties toward the lower index."""
    return np.argmax(logits, axis=1)
