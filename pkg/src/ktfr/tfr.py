"""Time-frequency grids and their CSV / PGM serialization."""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = ["TFRMatrix", "ComplexTFR", "write_csv", "read_csv", "write_pgm", "read_pgm"]


def _check_axis(axis, n, name):
    a = np.asarray(axis, dtype=np.float64)
    if a.shape != (n,):
        raise ValueError(f"{name} has length {a.size}, expected {n}")
    if n > 1 and not np.all(np.diff(a) > 0):
        raise ValueError(f"{name} must be strictly increasing")
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class TFRMatrix:
    """Real T x F grid; rows are time (samples), columns frequency (rad/sample)."""

    values: np.ndarray
    time_axis: np.ndarray
    freq_axis: np.ndarray
    provenance: str = "exact"

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2:
            raise ValueError("values must be a 2D grid")
        if not np.all(np.isfinite(v)):
            raise ValueError("TFR values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "time_axis", _check_axis(self.time_axis, v.shape[0], "time_axis"))
        object.__setattr__(self, "freq_axis", _check_axis(self.freq_axis, v.shape[1], "freq_axis"))

    @property
    def shape(self):
        return self.values.shape

    @property
    def dt(self) -> float:
        return float(self.time_axis[1] - self.time_axis[0]) if self.shape[0] > 1 else 1.0

    @property
    def dw(self) -> float:
        return float(self.freq_axis[1] - self.freq_axis[0]) if self.shape[1] > 1 else math.pi

    def with_values(self, values, provenance=None) -> "TFRMatrix":
        return TFRMatrix(values, self.time_axis, self.freq_axis,
                         self.provenance if provenance is None else provenance)


@dataclass(frozen=True)
class ComplexTFR:
    values: np.ndarray
    time_axis: np.ndarray
    freq_axis: np.ndarray
    window_sigma: float

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.complex128)
        if v.ndim != 2 or not np.all(np.isfinite(v)):
            raise ValueError("values must be a finite 2D grid")
        if not self.window_sigma > 0:
            raise ValueError("window_sigma must be positive")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "time_axis", _check_axis(self.time_axis, v.shape[0], "time_axis"))
        object.__setattr__(self, "freq_axis", _check_axis(self.freq_axis, v.shape[1], "freq_axis"))

    @property
    def shape(self):
        return self.values.shape

    def power(self, provenance="spectrogram") -> TFRMatrix:
        return TFRMatrix(np.abs(self.values) ** 2, self.time_axis, self.freq_axis, provenance)


# ---------------------------------------------------------------------- CSV --
# Layout: "# provenance=<tag>" line, then a header "time\freq,<f0>,<f1>,..."
# followed by one row per time sample "<t>,<v0>,<v1>,...".  17 significant
# digits make the round trip lossless.

def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def write_csv(path, tfr: TFRMatrix) -> None:
    lines = [f"# provenance={tfr.provenance}",
             "time\\freq," + ",".join(_fmt(f) for f in tfr.freq_axis)]
    for t, row in zip(tfr.time_axis, tfr.values):
        lines.append(_fmt(t) + "," + ",".join(_fmt(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_csv(path) -> TFRMatrix:
    provenance = "exact"
    rows = []
    header = None
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        if line.startswith("#"):
            key, _, val = line[1:].strip().partition("=")
            if key == "provenance":
                provenance = val
            continue
        if header is None:
            header = [float(v) for v in line.split(",")[1:]]
            continue
        rows.append([float(v) for v in line.split(",")])
    if header is None or not rows:
        raise ValueError(f"{path}: no TFR data")
    data = np.array(rows)
    return TFRMatrix(data[:, 1:], data[:, 0], np.array(header), provenance)


# ---------------------------------------------------------------------- PGM --

def write_pgm(path, tfr: TFRMatrix) -> Path:
    """8-bit binary PGM, min-max scaled, frequency increasing upward.

    The scaling goes to a sidecar ``<path>.csv`` so values can be recovered
    to within one quantization step.
    """
    v = tfr.values
    lo, hi = float(v.min()), float(v.max())
    span = hi - lo
    q = np.zeros(v.shape) if span == 0 else (v - lo) / span
    img = np.round(q.T[::-1] * 255).astype(np.uint8)
    rows, cols = img.shape
    path = Path(path)
    path.write_bytes(b"P5\n%d %d\n255\n" % (cols, rows) + img.tobytes())
    side = path.with_name(path.name + ".csv")
    side.write_text("min,max,time_rows,freq_bins,provenance\n"
                    f"{_fmt(lo)},{_fmt(hi)},{v.shape[0]},{v.shape[1]},{tfr.provenance}\n")
    return side


def read_pgm(path):
    """Return ``(values, lo, hi)`` with values de-quantized to the TFR layout."""
    path = Path(path)
    raw = path.read_bytes()
    # exactly one whitespace byte ends the header; pixel bytes may look like whitespace
    m = re.match(rb"P5\s+(\d+)\s+(\d+)\s+(\d+)\s", raw)
    if m is None:
        raise ValueError("not a binary PGM file")
    cols, rows, maxval = (int(g) for g in m.groups())
    img = np.frombuffer(raw[m.end(): m.end() + rows * cols], dtype=np.uint8).reshape(rows, cols)
    side = path.with_name(path.name + ".csv").read_text().splitlines()[1].split(",")
    lo, hi = float(side[0]), float(side[1])
    vals = img[::-1].T.astype(np.float64) / maxval * (hi - lo) + lo
    return vals, lo, hi
