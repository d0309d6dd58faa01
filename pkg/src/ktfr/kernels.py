"""Gaussian time-frequency kernels and kernel grids.

A kernel with spreads ``(sigma_t, sigma_f)`` and chirp term ``rho`` is

    phi(tau, w) = exp(-v' C^-1 v) / (pi sqrt(det C)),  C = [[st^2, rho], [rho, sf^2]]

with ``v = (tau - mu_t, w - mu_f)``: a normal density of covariance ``C / 2``.
Time is in samples, frequency in rad/sample.  With this scaling a Gabor
spectrogram of window spread ``s`` is exactly the kernel ``(s, 1/s, 0)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "KERNEL_EPS", "DET_FLOOR", "KernelParams", "KernelGrid",
    "gaussian_kernel", "sampled_kernel", "truncation_radius",
    "precision", "write_grid_csv", "read_grid_csv",
]

KERNEL_EPS = 1e-4
DET_FLOOR = 1e-12


def truncation_radius(var, eps=KERNEL_EPS):
    """Half-width where ``exp(-x^2 / var)`` falls to ``eps``."""
    return np.sqrt(np.asarray(var, dtype=np.float64) * math.log(1.0 / eps))


def precision(ctt, cff, ctf):
    """Entries of ``C^-1`` and ``det C`` (vectorized)."""
    ctt, cff, ctf = (np.asarray(v, dtype=np.float64) for v in (ctt, cff, ctf))
    det = ctt * cff - ctf * ctf
    return cff / det, -ctf / det, ctt / det, det


@dataclass(frozen=True)
class KernelParams:
    mu_t: float
    mu_f: float
    sigma_t: float
    sigma_f: float
    rho: float = 0.0

    def __post_init__(self):
        if not (self.sigma_t > 0 and self.sigma_f > 0):
            raise ValueError("sigma_t and sigma_f must be positive")
        if not all(math.isfinite(v) for v in (self.mu_t, self.mu_f, self.rho)):
            raise ValueError("kernel parameters must be finite")
        if self.det < DET_FLOOR:
            raise ValueError(f"covariance not positive definite (det={self.det:.3g})")

    @property
    def cov(self) -> np.ndarray:
        return np.array([[self.sigma_t ** 2, self.rho], [self.rho, self.sigma_f ** 2]])

    @property
    def det(self) -> float:
        return self.sigma_t ** 2 * self.sigma_f ** 2 - self.rho ** 2

    def as_tuple(self):
        return (self.mu_t, self.mu_f, self.sigma_t, self.sigma_f, self.rho)

    def density(self, tau, w):
        ptt, ptf, pff, det = precision(self.sigma_t ** 2, self.sigma_f ** 2, self.rho)
        a = np.asarray(tau, dtype=np.float64) - self.mu_t
        b = np.asarray(w, dtype=np.float64) - self.mu_f
        return np.exp(-(ptt * a * a + 2 * ptf * a * b + pff * b * b)) / (math.pi * math.sqrt(det))


def gaussian_kernel(p: KernelParams, t: int, f: int, eps: float = KERNEL_EPS) -> np.ndarray:
    """Kernel density on the T x F WVD grid (rows = samples 0..T-1, columns
    ``pi k / F``), zeroed outside the per-axis truncation box."""
    tau = np.arange(t, dtype=np.float64)[:, None]
    w = (math.pi * np.arange(f) / f)[None, :]
    g = p.density(tau, w)
    ht = truncation_radius(p.sigma_t ** 2, eps)
    hf = truncation_radius(p.sigma_f ** 2, eps)
    g[(np.abs(tau - p.mu_t) > ht)[:, 0], :] = 0.0
    g[:, (np.abs(w - p.mu_f) > hf)[0, :]] = 0.0
    return g


def sampled_kernel(sigma_t, sigma_f, rho=0.0, dt=1.0, dw=1.0, eps=KERNEL_EPS) -> np.ndarray:
    """Zero-mean kernel sampled on an odd grid of steps ``(dt, dw)`` and
    multiplied by the cell area, ready for ``cohen_smooth``."""
    p = KernelParams(0.0, 0.0, sigma_t, sigma_f, rho)
    it = int(math.floor(truncation_radius(sigma_t ** 2, eps) / dt))
    jf = int(math.floor(truncation_radius(sigma_f ** 2, eps) / dw))
    tau = (np.arange(-it, it + 1) * dt)[:, None]
    w = (np.arange(-jf, jf + 1) * dw)[None, :]
    return p.density(tau, w) * dt * dw


@dataclass(frozen=True)
class KernelGrid:
    """Kernel parameters for every output cell.

    ``shared=True`` stores one record per output frequency; the time center
    then tracks the output time (``mu_t = t``), which makes the transform
    translation equivariant.
    """

    time_axis: np.ndarray
    freq_axis: np.ndarray
    mu_f: np.ndarray
    sigma_t: np.ndarray
    sigma_f: np.ndarray
    rho: np.ndarray
    mu_t: np.ndarray | None = None
    shared: bool = False
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        ta = np.asarray(self.time_axis, dtype=np.float64)
        fa = np.asarray(self.freq_axis, dtype=np.float64)
        object.__setattr__(self, "time_axis", ta)
        object.__setattr__(self, "freq_axis", fa)
        shape = (fa.size,) if self.shared else (ta.size, fa.size)
        for name in ("mu_f", "sigma_t", "sigma_f", "rho"):
            v = np.broadcast_to(np.asarray(getattr(self, name), dtype=np.float64), shape).copy()
            object.__setattr__(self, name, v)
        if self.shared:
            if self.mu_t is not None:
                raise ValueError("per-frequency grids imply mu_t = t; do not pass mu_t")
        else:
            mt = self.mu_t if self.mu_t is not None else np.repeat(ta[:, None], fa.size, axis=1)
            object.__setattr__(self, "mu_t", np.broadcast_to(np.asarray(mt, float), shape).copy())
        if np.any(self.sigma_t <= 0) or np.any(self.sigma_f <= 0):
            raise ValueError("sigma_t and sigma_f must be positive")
        det = self.sigma_t ** 2 * self.sigma_f ** 2 - self.rho ** 2
        if np.any(det < DET_FLOOR):
            raise ValueError(f"covariance not positive definite (min det={det.min():.3g})")

    @property
    def shape(self):
        return (self.time_axis.size, self.freq_axis.size)

    def cells(self):
        """Full ``(T, F)`` arrays ``(mu_t, mu_f, sigma_t, sigma_f, rho)``."""
        t, f = self.shape
        if not self.shared:
            return self.mu_t, self.mu_f, self.sigma_t, self.sigma_f, self.rho
        rep = lambda v: np.broadcast_to(v[None, :], (t, f))  # noqa: E731
        return (np.broadcast_to(self.time_axis[:, None], (t, f)), rep(self.mu_f),
                rep(self.sigma_t), rep(self.sigma_f), rep(self.rho))

    def params(self, i: int, j: int) -> KernelParams:
        mt, mf, st, sf, r = self.cells()
        return KernelParams(float(mt[i, j]), float(mf[i, j]), float(st[i, j]),
                            float(sf[i, j]), float(r[i, j]))

    def replicated(self) -> "KernelGrid":
        """Per-cell copy of a shared grid."""
        mt, mf, st, sf, r = self.cells()
        return KernelGrid(self.time_axis, self.freq_axis, mf, st, sf, r, mu_t=mt,
                          shared=False, meta=dict(self.meta))

    def with_time_axis(self, time_axis) -> "KernelGrid":
        if not self.shared:
            raise ValueError("only shared grids can be re-timed")
        return KernelGrid(time_axis, self.freq_axis, self.mu_f, self.sigma_t, self.sigma_f,
                          self.rho, shared=True, meta=dict(self.meta))

    def theta(self) -> np.ndarray:
        """Stacked ``(T, F, 5)`` parameter vectors."""
        return np.stack([np.asarray(a, dtype=np.float64) for a in self.cells()], axis=-1)


# ---------------------------------------------------------------------- CSV --

_COLS = ("t", "f", "mu_t", "mu_f", "sigma_t", "sigma_f", "rho")


def write_grid_csv(path, grid: KernelGrid) -> None:
    fmt = lambda v: format(float(v), ".17g")  # noqa: E731
    lines = [f"# sharing={'per-frequency' if grid.shared else 'per-cell'}", ",".join(_COLS)]
    if grid.shared:
        for j, f in enumerate(grid.freq_axis):
            lines.append(",".join(["", fmt(f), "", fmt(grid.mu_f[j]), fmt(grid.sigma_t[j]),
                                   fmt(grid.sigma_f[j]), fmt(grid.rho[j])]))
        lines.insert(1, "# time_axis=" + " ".join(fmt(t) for t in grid.time_axis))
    else:
        for i, t in enumerate(grid.time_axis):
            for j, f in enumerate(grid.freq_axis):
                lines.append(",".join(fmt(v) for v in (t, f, grid.mu_t[i, j], grid.mu_f[i, j],
                                                        grid.sigma_t[i, j], grid.sigma_f[i, j],
                                                        grid.rho[i, j])))
    Path(path).write_text("\n".join(lines) + "\n")


def read_grid_csv(path) -> KernelGrid:
    shared = False
    time_axis = None
    rows = []
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        if line.startswith("#"):
            key, _, val = line[1:].strip().partition("=")
            if key == "sharing":
                shared = val == "per-frequency"
            elif key == "time_axis":
                time_axis = np.array([float(v) for v in val.split()])
            continue
        if line.startswith("t,"):
            continue
        rows.append([float(v) if v else math.nan for v in line.split(",")])
    data = np.array(rows)
    if shared:
        if time_axis is None:
            raise ValueError("per-frequency grid file lacks a time_axis line")
        return KernelGrid(time_axis, data[:, 1], data[:, 3], data[:, 4], data[:, 5],
                          data[:, 6], shared=True)
    ts = np.unique(data[:, 0])
    fs = np.unique(data[:, 1])
    shape = (ts.size, fs.size)
    if data.shape[0] != ts.size * fs.size:
        raise ValueError("per-cell grid file is not a full T x F table")
    order = np.lexsort((data[:, 1], data[:, 0]))
    d = data[order]
    return KernelGrid(ts, fs, d[:, 3].reshape(shape), d[:, 4].reshape(shape),
                      d[:, 5].reshape(shape), d[:, 6].reshape(shape),
                      mu_t=d[:, 2].reshape(shape))
