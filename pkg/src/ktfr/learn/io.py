"""Checkpoint and loss-curve CSV files.

Checkpoint layout: ``# key=value`` header lines for the training config,
the front end and the seed, then rows ``name,row,col,value`` for the kernel
centres, raw kernel parameters, head weights and bias.  Values are written
with 17 significant digits so a round trip is lossless.
"""
from __future__ import annotations

import csv
from dataclasses import asdict, fields
from pathlib import Path

import numpy as np

from .head import ClassifierHead
from .params import UnconstrainedParams
from .train import FrontEnd, Model, TrainConfig

__all__ = ["write_checkpoint", "read_checkpoint", "write_curve", "read_curve"]


def _fmt(v) -> str:
    return format(float(v), ".17g")


def write_checkpoint(path, model: Model, cfg: TrainConfig | None = None) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        if cfg is not None:
            for k, v in asdict(cfg).items():
                fh.write(f"# cfg.{k}={v}\n")
            fh.write(f"# seed={cfg.seed}\n")
        for k, v in asdict(model.front).items():
            fh.write(f"# front.{k}={v}\n")
        fh.write(f"# raw.eps={_fmt(model.raw.eps)}\n")
        fh.write(f"# head.log_offset={_fmt(model.head.log_offset)}\n")
        w = csv.writer(fh)
        w.writerow(["name", "row", "col", "value"])
        for name, arr in (("mu_f", model.mu_f), ("sigma_t_raw", model.raw.sigma_t_raw),
                          ("sigma_f_raw", model.raw.sigma_f_raw), ("rho_raw", model.raw.rho_raw),
                          ("bias", model.head.bias)):
            for i, v in enumerate(arr):
                w.writerow([name, i, 0, _fmt(v)])
        for (i, c), v in np.ndenumerate(model.head.weights):
            w.writerow(["weight", i, c, _fmt(v)])


def _cast(kind, text: str):
    if kind is int:
        return int(text)
    if kind is float:
        return float(text)
    return text


def _build(cls, header: dict, prefix: str):
    kw = {}
    for f in fields(cls):
        key = f"{prefix}.{f.name}"
        if key in header:
            kind = type(f.default) if f.default is not None else str
            kw[f.name] = _cast(kind, header[key])
    return cls(**kw)


def read_checkpoint(path) -> tuple[Model, TrainConfig | None]:
    header, rows = {}, []
    with Path(path).open(newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                k, _, v = line[1:].strip().partition("=")
                header[k.strip()] = v.strip()
            else:
                rows = list(csv.DictReader([line, *fh]))
                break
    if not rows:
        raise ValueError(f"{path}: no parameter rows")
    front = _build(FrontEnd, header, "front")
    cfg = _build(TrainConfig, header, "cfg") if any(k.startswith("cfg.") for k in header) else None
    vec = {}
    for r in rows:
        vec.setdefault(r["name"], {})[(int(r["row"]), int(r["col"]))] = float(r["value"])

    def arr(name):
        d = vec.get(name)
        if not d:
            raise ValueError(f"{path}: missing {name} rows")
        return np.array([d[(i, 0)] for i in range(len(d))])

    w = vec.get("weight", {})
    nf = 1 + max(i for i, _ in w)
    nc = 1 + max(c for _, c in w)
    weights = np.array([[w[(i, c)] for c in range(nc)] for i in range(nf)])
    raw = UnconstrainedParams(arr("sigma_t_raw"), arr("sigma_f_raw"), arr("rho_raw"),
                              float(header.get("raw.eps", "1e-3")))
    head = ClassifierHead(weights, arr("bias"), float(header.get("head.log_offset", "0.1")))
    return Model(front, raw, head, arr("mu_f")), cfg


def write_curve(path, curve) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["epoch", "train_loss", "test_acc"])
        for e, loss, acc in curve:
            w.writerow([int(e), _fmt(loss), _fmt(acc)])


def read_curve(path) -> list[tuple[int, float, float]]:
    with Path(path).open(newline="") as fh:
        return [(int(r["epoch"]), float(r["train_loss"]), float(r["test_acc"]))
                for r in csv.DictReader(fh)]
