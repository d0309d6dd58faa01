"""Adam training of time-shared kernels plus a linear head.

Kernel gradients are central differences through the fast path (via the
cached pooled features of :mod:`.features`); the head gradient is analytic.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ..kernels import KERNEL_EPS, KernelGrid
from ..presets import Preset, preset_params
from ..stft import BaseSmoothing
from .data import LabeledSet
from .features import PooledFeatureEngine
from .head import ClassifierHead, cross_entropy, head_gradient, head_logits, pool_features, predict
from .params import (CONSTRAINT_EPS, RHO_RAW_CLIP, UnconstrainedParams, constrain,
                     floor_spreads, from_covariances, to_grid)

__all__ = ["TrainConfig", "FrontEnd", "Model", "Adam", "TrainResult", "DivergenceError",
           "init_model", "loss_and_grad", "train", "evaluate", "model_grid", "project_feasible"]

DIVERGENCE_LOSS = 1e6
# kernels keep this relative excess over the base variances
BASE_MARGIN = 0.05


class DivergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-3
    epochs: int = 200
    batch_size: int = 0  # 0 means full batch
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps_opt: float = 1e-8
    gradient_mode: str = "numeric"  # or "head"
    h: float = 1e-4

    def __post_init__(self):
        if not self.learning_rate >= 0 or not math.isfinite(self.learning_rate):
            raise ValueError("learning_rate must be finite and >= 0")
        if not self.h > 0:
            raise ValueError("h must be positive")
        if self.epochs < 0 or self.batch_size < 0:
            raise ValueError("epochs and batch_size must be >= 0")
        if self.gradient_mode not in ("numeric", "head"):
            raise ValueError(f"unknown gradient_mode {self.gradient_mode!r}")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1 and self.eps_opt > 0):
            raise ValueError("invalid Adam constants")


@dataclass(frozen=True)
class FrontEnd:
    """Fixed (non-learned) part of the model: kernel centres, units, base
    smoothing and the coarse grids of the cached fast path."""

    n_kernels: int = 16
    length: int = 512
    time_unit: float = 512.0
    freq_unit: float = math.pi
    base_sigma_t: float = 4.0
    base_sigma_f: float = 0.03
    hop: int = 16
    n_freq: int = 128
    constraint_eps: float = CONSTRAINT_EPS

    @property
    def base(self) -> BaseSmoothing:
        return BaseSmoothing(self.base_sigma_t, self.base_sigma_f)

    @property
    def out_times(self) -> np.ndarray:
        return np.arange(0, self.length, self.hop, dtype=np.float64)

    @property
    def mu_f(self) -> np.ndarray:
        return (np.arange(self.n_kernels) + 0.5) * math.pi / self.n_kernels

    def engine(self, signals, eps: float = KERNEL_EPS) -> PooledFeatureEngine:
        return PooledFeatureEngine(signals, self.base, self.out_times, hop=self.hop,
                                   n_freq=self.n_freq, eps=eps)


@dataclass
class Model:
    front: FrontEnd
    raw: UnconstrainedParams
    head: ClassifierHead
    mu_f: np.ndarray = field(default=None)

    def __post_init__(self):
        self.mu_f = self.front.mu_f if self.mu_f is None else np.asarray(self.mu_f, float).copy()
        if self.mu_f.size != self.raw.size or self.head.weights.shape[0] != self.raw.size:
            raise ValueError("kernel count mismatch between params, centres and head")


def model_grid(model: Model, time_axis=None) -> KernelGrid:
    """The model's kernels as a time-shared grid in samples / rad-per-sample."""
    f = model.front
    t = f.out_times if time_axis is None else time_axis
    return to_grid(constrain(model.raw), model.mu_f, t, model.mu_f, f.time_unit, f.freq_unit)


def init_model(front: FrontEnd, n_classes: int, seed: int,
               init: Preset | UnconstrainedParams | None = None) -> Model:
    """Model with a small random head; kernels from a preset, explicit raw
    values, or by default an untilted kernel of 4x the base spreads."""
    head = ClassifierHead.init(front.n_kernels, n_classes, seed)
    if isinstance(init, UnconstrainedParams):
        return Model(front, init, head)
    if isinstance(init, Preset):
        g = preset_params(init, 1, front.n_kernels)
        st, sf, rho = g.sigma_t.ravel(), g.sigma_f.ravel(), g.rho.ravel()
        corr = rho / (st * sf)
        # presets may sit below the constraint floor or the base; widen them
        ft, ff = floor_spreads(front.time_unit, front.freq_unit, front.constraint_eps)
        st = np.maximum(st, 1.01 * max(ft, front.base_sigma_t / math.sqrt(1 - corr.max() ** 2 + 1e-12)))
        sf = np.maximum(sf, 1.01 * max(ff, front.base_sigma_f / math.sqrt(1 - corr.max() ** 2 + 1e-12)))
        raw = from_covariances(st, sf, corr, front.time_unit, front.freq_unit,
                               front.constraint_eps)
        return Model(front, raw, head, g.mu_f.ravel())
    n = front.n_kernels
    raw = from_covariances(np.full(n, 4 * front.base_sigma_t + front.time_unit * 0.05),
                           np.full(n, 4 * front.base_sigma_f + front.freq_unit * 0.05),
                           np.zeros(n), front.time_unit, front.freq_unit, front.constraint_eps)
    return Model(front, raw, head)


def project_feasible(raw: UnconstrainedParams, front: FrontEnd, h: float = 0.0
                     ) -> UnconstrainedParams:
    """Nearest-by-clipping raw values whose kernels stay wider than the base
    smoothing, also after any single finite-difference step ``h (1 + |p|)``.

    Spreads are raised to ``(1 + BASE_MARGIN)`` base variance plus the step,
    then the correlation is capped so the residual stays positive definite.
    Feasible parameters are returned unchanged.
    """
    eps = raw.eps
    bt = (front.base_sigma_t / front.time_unit) ** 2
    bf = (front.base_sigma_f / front.freq_unit) ** 2
    st, sf, r = raw.sigma_t_raw.copy(), raw.sigma_f_raw.copy(), raw.rho_raw.copy()
    for a, b in ((st, bt), (sf, bf)):
        # |a| - h (1 + |a|) >= need  <=>  |a| >= (need + h) / (1 - h)
        need = (1.0 + BASE_MARGIN) * b - eps
        low = max(need + h, 0.0) / (1.0 - h)
        small = np.abs(a) < low
        a[small] = np.where(a[small] < 0, -low, low)
    ctt, cff = np.abs(st) + eps, np.abs(sf) + eps
    dt, df, dr = (h * (1.0 + np.abs(a)) for a in (st, sf, r))
    lo_t = np.maximum(ctt - dt, eps) - bt
    lo_f = np.maximum(cff - df, eps) - bf
    hi = (ctt + dt) * (cff + df)
    tmax = np.sqrt(np.clip((1.0 - BASE_MARGIN) * lo_t * lo_f / hi, 0.0, 1.0))
    rmax = np.maximum(np.arctanh(np.minimum(tmax, math.tanh(RHO_RAW_CLIP))) - dr, 0.0)
    r = np.clip(r, -rmax, rmax)
    return UnconstrainedParams(st, sf, r, eps)


def _project(model: Model, cfg: TrainConfig) -> Model:
    if cfg.gradient_mode == "head":
        return model
    raw = project_feasible(model.raw, model.front, cfg.h)
    return Model(model.front, raw, model.head, model.mu_f)


def _map(engine: PooledFeatureEngine, model: Model, j: int, u: np.ndarray) -> np.ndarray:
    f = model.front
    cov = constrain(UnconstrainedParams.from_vector(u, model.raw.eps))
    return engine.weight_map(float(model.mu_f[j]), float(cov.ctt[0] * f.time_unit ** 2),
                             float(cov.cff[0] * f.freq_unit ** 2),
                             float(cov.ctf[0] * f.time_unit * f.freq_unit))


def _pooled(engine: PooledFeatureEngine, model: Model, idx=None) -> np.ndarray:
    v = model.raw.vector().reshape(-1, 3)
    maps = np.stack([_map(engine, model, j, v[j]) for j in range(v.shape[0])])
    return engine.pooled(maps, idx)


def _loss(pooled, labels, head) -> float:
    return cross_entropy(head_logits(pool_features(pooled, head.log_offset), head), labels)


def loss_and_grad(model: Model, engine: PooledFeatureEngine, idx, labels,
                  mode: str = "numeric", h: float = 1e-4) -> dict:
    """Mean cross-entropy on rows ``idx`` of ``engine`` and its gradients.

    ``numeric``: every raw kernel parameter is perturbed by
    ``+-h (1 + |p|)``; only the affected kernel's pooled column is rebuilt.
    ``head``: kernel gradient is zero (frozen kernels).
    """
    idx = np.asarray(idx, dtype=np.int64)
    labels = np.asarray(labels, dtype=np.int64)
    if idx.size == 0:
        raise ValueError("empty batch")
    flat = engine.rows(idx)
    pooled = _pooled(engine, model, idx)
    feats = pool_features(pooled, model.head.log_offset)
    loss = cross_entropy(head_logits(feats, model.head), labels)
    if not math.isfinite(loss):
        raise DivergenceError("non-finite loss at current parameters")
    dw, db = head_gradient(feats, labels, model.head)
    v = model.raw.vector()
    g = np.zeros_like(v)
    if mode == "numeric":
        for q in range(v.size):
            j = q // 3
            step = h * (1.0 + abs(v[q]))
            vals = []
            for sgn in (1.0, -1.0):
                u = v[3 * j:3 * j + 3].copy()
                u[q - 3 * j] += sgn * step
                col = flat @ _map(engine, model, j, u).ravel()
                p = pooled.copy()
                p[:, j] = col
                lv = _loss(p, labels, model.head)
                if not math.isfinite(lv):
                    raise DivergenceError(f"non-finite loss when perturbing parameter {q}")
                vals.append(lv)
            g[q] = (vals[0] - vals[1]) / (2.0 * step)
    elif mode != "head":
        raise ValueError(f"unknown gradient mode {mode!r}")
    return {"loss": loss, "grad_raw": g, "grad_weights": dw, "grad_bias": db}


class Adam:
    """Adaptive-moment descent on a flat parameter vector."""

    def __init__(self, size: int, lr: float, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.b1, self.b2, self.eps = lr, beta1, beta2, eps
        self.m = np.zeros(size)
        self.v = np.zeros(size)
        self.t = 0

    def step(self, p: np.ndarray, g: np.ndarray) -> np.ndarray:
        self.t += 1
        self.m = self.b1 * self.m + (1 - self.b1) * g
        self.v = self.b2 * self.v + (1 - self.b2) * g * g
        mh = self.m / (1 - self.b1 ** self.t)
        vh = self.v / (1 - self.b2 ** self.t)
        return p - self.lr * mh / (np.sqrt(vh) + self.eps)


@dataclass
class TrainResult:
    model: Model
    curve: list  # (epoch, train_loss, test_acc)
    test_accuracy: float
    initial_accuracy: float
    config: TrainConfig


def _accuracy(pooled, labels, head) -> float:
    return float(np.mean(predict(head_logits(pool_features(pooled, head.log_offset), head)) == labels))


def evaluate(data: LabeledSet, model: Model, engine: PooledFeatureEngine | None = None) -> float:
    """Argmax-logit accuracy; ties resolve to the lower class index."""
    if len(data) == 0:
        raise ValueError("empty evaluation set")
    engine = model.front.engine(data.signals) if engine is None else engine
    return _accuracy(_pooled(engine, model), data.labels, model.head)


def _pack(model: Model) -> np.ndarray:
    return np.concatenate([model.raw.vector(), model.head.weights.ravel(), model.head.bias])


def _unpack(model: Model, p: np.ndarray) -> Model:
    nr = model.raw.size * 3
    nw = model.head.weights.size
    raw = UnconstrainedParams.from_vector(p[:nr], model.raw.eps)
    head = ClassifierHead(p[nr:nr + nw].reshape(model.head.weights.shape), p[nr + nw:],
                          model.head.log_offset)
    return Model(model.front, raw, head, model.mu_f)


def train(train_set: LabeledSet, test_set: LabeledSet, cfg: TrainConfig,
          init: Preset | UnconstrainedParams | Model | None = None,
          front: FrontEnd | None = None, progress=None) -> TrainResult:
    """Fit kernels and head with Adam; deterministic for a fixed ``cfg.seed``.

    ``init=None`` starts from the chirpogram preset: tilted kernels are what
    separate time-reversed classes once features are pooled over time.

    The curve records, per epoch, the mean batch loss and the test accuracy
    after the epoch's updates.  ``progress(epoch, loss, acc)`` is optional.
    """
    if cfg.learning_rate <= 0 and cfg.learning_rate != 0:
        raise ValueError("learning_rate must be >= 0")
    if isinstance(init, Model):
        model = init
    else:
        front = front or FrontEnd(length=train_set.signals[0].n,
                                  time_unit=float(train_set.signals[0].n))
        model = init_model(front, train_set.n_classes, cfg.seed,
                           Preset("chirpogram") if init is None else init)
    model = _project(model, cfg)
    tr = model.front.engine(train_set.signals)
    te = model.front.engine(test_set.signals)
    initial = _accuracy(_pooled(te, model), test_set.labels, model.head)
    rng = np.random.default_rng(cfg.seed)
    n = len(train_set)
    bs = n if cfg.batch_size in (0, None) or cfg.batch_size >= n else cfg.batch_size
    head_only = cfg.gradient_mode == "head"
    opt = Adam(_pack(model).size, cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.eps_opt)
    curve = []
    acc = initial
    for epoch in range(1, cfg.epochs + 1):
        order = np.arange(n) if bs == n else rng.permutation(n)
        losses = []
        for s in range(0, n, bs):
            idx = np.sort(order[s:s + bs])
            out = loss_and_grad(model, tr, idx, train_set.labels[idx],
                                "head" if head_only else "numeric", cfg.h)
            if out["loss"] > DIVERGENCE_LOSS:
                raise DivergenceError(f"loss {out['loss']:.3g} exceeds {DIVERGENCE_LOSS:g} "
                                      f"at epoch {epoch}")
            losses.append(out["loss"])
            g = np.concatenate([out["grad_raw"], out["grad_weights"].ravel(), out["grad_bias"]])
            model = _project(_unpack(model, opt.step(_pack(model), g)), cfg)
        acc = _accuracy(_pooled(te, model), test_set.labels, model.head)
        curve.append((epoch, float(np.mean(losses)), acc))
        if progress is not None:
            progress(epoch, curve[-1][1], acc)
    return TrainResult(model, curve, acc, initial, cfg)


def config_dict(cfg: TrainConfig, front: FrontEnd) -> dict:
    d = {f"cfg.{k}": v for k, v in asdict(cfg).items()}
    d.update({f"front.{k}": v for k, v in asdict(front).items()})
    return d
