"""Synthetic labeled sets: linear up-chirps versus down-chirps."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..signal import Signal, SignalSpec, synth

__all__ = ["LabeledSet", "chirp_task", "split"]


@dataclass(frozen=True)
class LabeledSet:
    signals: tuple
    labels: np.ndarray
    n_classes: int
    specs: tuple = ()

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        object.__setattr__(self, "labels", labels)
        if len(self.signals) != labels.size:
            raise ValueError("one label per signal")
        if self.n_classes < 2:
            raise ValueError("need at least 2 classes")
        if labels.size and (labels.min() < 0 or labels.max() >= self.n_classes):
            raise ValueError("labels out of range")

    def __len__(self):
        return self.labels.size

    def subset(self, idx) -> "LabeledSet":
        idx = np.asarray(idx, dtype=np.int64)
        specs = tuple(self.specs[i] for i in idx) if self.specs else ()
        return LabeledSet(tuple(self.signals[i] for i in idx), self.labels[idx], self.n_classes, specs)


def chirp_task(n_train: int = 200, n_test: int = 100, length: int = 512, seed: int = 0,
               band=(0.1, 0.9), jitter: float = 0.08, amp_range=(0.7, 1.3),
               noise: float = 0.0) -> tuple[LabeledSet, LabeledSet]:
    """Balanced up-chirp (label 0) / down-chirp (label 1) sets.

    Each chirp sweeps between ``band[0]`` and ``band[1]`` (fractions of pi),
    each endpoint jittered by up to ``jitter``, with random phase and
    amplitude; ``noise`` adds complex white noise of that standard deviation.
    The two classes share the same spectral occupancy, so only
    time-frequency orientation separates them.
    """
    total = n_train + n_test
    if total % 2 or n_train % 2:
        raise ValueError("balanced classes need even set sizes")
    rng = np.random.default_rng(seed)
    labels = np.tile([0, 1], total // 2)
    specs, signals = [], []
    for lab in labels:
        lo = (band[0] + jitter * rng.uniform(-1, 1)) * math.pi
        hi = (band[1] + jitter * rng.uniform(-1, 1)) * math.pi
        lo, hi = min(max(lo, 0.0), math.pi), min(max(hi, 0.0), math.pi)
        w0, w1 = (lo, hi) if lab == 0 else (hi, lo)
        spec = SignalSpec("linear_chirp", length, 1.0, float(rng.uniform(*amp_range)),
                          {"omega_start": w0, "omega_end": w1,
                           "phase": float(rng.uniform(0, 2 * math.pi))})
        x = synth(spec).samples
        if noise > 0:
            x = x + noise * (rng.standard_normal(length) + 1j * rng.standard_normal(length)) / math.sqrt(2)
        specs.append(spec)
        signals.append(Signal(x, 1.0))
    full = LabeledSet(tuple(signals), labels, 2, tuple(specs))
    return split(full, n_train, seed)


def split(data: LabeledSet, n_train: int, seed: int) -> tuple[LabeledSet, LabeledSet]:
    """Stratified split driven by ``seed``."""
    rng = np.random.default_rng(seed + 1)
    train, test = [], []
    for c in range(data.n_classes):
        idx = np.flatnonzero(data.labels == c)
        idx = idx[rng.permutation(idx.size)]
        k = int(round(n_train * idx.size / len(data)))
        train.extend(idx[:k])
        test.extend(idx[k:])
    return data.subset(sorted(train)), data.subset(sorted(test))
