"""Exact, fast and time-equivariant evaluation of the Gaussian K-transform.

``K[t, f] = <WV_x, phi_theta(t, f)>``: a per-cell inner product of the WVD
with a Gaussian kernel, computed as a Riemann sum with explicit cell area.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import signal as ssig

from . import _backend
from .kernels import KERNEL_EPS, KernelGrid, KernelParams, precision, truncation_radius
from .signal import Signal, analytic
from .stft import (BaseSmoothing, ResidualNotPSDError, _residuals, residual_smooth_sample,
                   smoothed_pwvd)
from .tfr import TFRMatrix
from .wvd import wvd_direct

__all__ = ["k_exact", "k_fast", "k_equivariant", "default_base", "prepare", "kernel_linear"]


def prepare(x: Signal, convert: bool = True) -> Signal:
    """Analytic version of a real input; complex inputs pass through."""
    return analytic(x) if (convert and x.is_real) else x


def _wrap(freq_boundary: str) -> bool:
    if freq_boundary not in ("periodic", "zero"):
        raise ValueError(f"unknown frequency boundary {freq_boundary!r}")
    return freq_boundary == "periodic"


def _inner(w: TFRMatrix, grid: KernelGrid, eps: float, freq_boundary: str) -> np.ndarray:
    mt, mf, st, sf, rho = (np.ascontiguousarray(a, dtype=np.float64).ravel() for a in grid.cells())
    ptt, ptf, pff, det = precision(st ** 2, sf ** 2, rho)
    ht = truncation_radius(st ** 2, eps)
    hf = truncation_radius(sf ** 2, eps)
    sums, _ = _backend.gaussian_cells(np.ascontiguousarray(w.values), float(w.time_axis[0]), w.dt,
                                      float(w.freq_axis[0]), w.dw, mt, mf, ptt, ptf, pff, ht, hf,
                                      _wrap(freq_boundary))
    return (sums * w.dt * w.dw / (math.pi * np.sqrt(det))).reshape(grid.shape)


def k_exact(x: Signal, grid: KernelGrid, eps: float = KERNEL_EPS, convert: bool = True,
            wvd: TFRMatrix | None = None, freq_boundary: str = "periodic") -> TFRMatrix:
    """Reference evaluation against the exact WVD (pass ``wvd`` to reuse one).

    Rows outside the record count as zero.  The WVD is a DFT over lag and so
    repeats with period pi in frequency; by default kernel mass reaching past
    0 or pi wraps around (``freq_boundary="zero"`` drops it instead).
    """
    x = prepare(x, convert)
    w = wvd if wvd is not None else wvd_direct(x)
    return TFRMatrix(_inner(w, grid, eps, freq_boundary), grid.time_axis, grid.freq_axis, "exact")


def kernel_linear(x: Signal, grid: KernelGrid, alpha: float, beta: float, other: KernelGrid,
                  eps: float = KERNEL_EPS, freq_boundary: str = "periodic") -> TFRMatrix:
    """``alpha K_grid + beta K_other`` from a single WVD (kernel linearity)."""
    w = wvd_direct(prepare(x))
    v = alpha * _inner(w, grid, eps, freq_boundary) + beta * _inner(w, other, eps, freq_boundary)
    return TFRMatrix(v, grid.time_axis, grid.freq_axis, "exact")


def default_base(grid: KernelGrid, shrink: float = 0.7) -> BaseSmoothing:
    """Largest convenient base smoothing dominated by every cell.

    Uses ``alpha * (min sigma_t, min sigma_f)`` with ``alpha`` small enough
    that ``1 - alpha^2`` covers the strongest kernel correlation, which keeps
    every residual covariance PSD.
    """
    _, _, st, sf, rho = (np.asarray(a, dtype=np.float64) for a in grid.cells())
    rmax = float(np.max(np.abs(rho) / (st * sf)))
    alpha = min(shrink, math.sqrt(max(1.0 - rmax, 0.0)) * 0.999)
    if alpha <= 0:
        raise ResidualNotPSDError("kernels are too strongly tilted for any base smoothing")
    bt = alpha * float(st.min())
    bf = alpha * float(sf.min())
    if bt * bf > 1.0:
        bf = 1.0 / bt
    return BaseSmoothing(bt, bf)


def k_fast(x: Signal, grid: KernelGrid, base: BaseSmoothing | None = None,
           eps: float = KERNEL_EPS, convert: bool = True, hop: int = 1,
           n_freq: int | None = None) -> TFRMatrix:
    """Gabor STFT -> spectral autocorrelation -> per-cell residual smoothing.

    Raises ``ResidualNotPSDError`` when a kernel is narrower than ``base``;
    ``k_exact`` handles such grids.
    """
    x = prepare(x, convert)
    base = base or default_base(grid)
    _, _, rtt, _, _ = _residuals(grid, base)
    t_lo = float(np.min(grid.time_axis))
    t_hi = float(np.max(grid.time_axis))
    reach = float(truncation_radius(rtt.max() + hop ** 2, eps)) + hop
    pad = int(math.ceil(max(0.0, reach - t_lo, reach + t_hi - (x.n - 1))))
    # whole hops keep base rows on the same lattice as t = 0
    pad = min(-(-pad // hop) * hop, 4 * x.n)
    b = smoothed_pwvd(x, base, hop=hop, n_freq=n_freq or x.n, pad=pad, eps=eps)
    out = residual_smooth_sample(b, base, grid, eps, freq_boundary="periodic")
    return out.with_values(out.values, "fast")


def k_equivariant(x: Signal, freq_params: KernelGrid, eps: float = KERNEL_EPS,
                  convert: bool = True, freq_boundary: str = "periodic") -> TFRMatrix:
    """Time-shared kernels: each output column is a time correlation of the
    WVD with a fixed kernel slice, so input shifts commute with the output."""
    if not freq_params.shared:
        raise ValueError("not time-shared: k_equivariant needs a per-frequency grid")
    ta = freq_params.time_axis
    if not np.allclose(ta, np.round(ta)):
        raise ValueError("time-shared output rows must sit on integer samples")
    x = prepare(x, convert)
    w = wvd_direct(x)
    n = x.n
    dw = w.dw
    wrap = _wrap(freq_boundary)
    rows = np.round(ta).astype(np.int64)
    out = np.zeros((ta.size, freq_params.freq_axis.size))
    for j in range(freq_params.freq_axis.size):
        p = KernelParams(0.0, float(freq_params.mu_f[j]), float(freq_params.sigma_t[j]),
                         float(freq_params.sigma_f[j]), float(freq_params.rho[j]))
        ia = int(math.floor(truncation_radius(p.sigma_t ** 2, eps)))
        hf = float(truncation_radius(p.sigma_f ** 2, eps))
        cols = np.arange(int(math.ceil((p.mu_f - hf) / dw)), int(math.floor((p.mu_f + hf) / dw)) + 1)
        if not wrap:
            cols = cols[(cols >= 0) & (cols < n)]
        if cols.size == 0:
            continue
        a = np.arange(-ia, ia + 1, dtype=np.float64)[:, None]
        kern = p.density(a, (cols * dw)[None, :]) * dw
        full = ssig.fftconvolve(w.values[:, cols % n], kern[::-1], mode="full", axes=0).sum(axis=1)
        idx = rows + ia
        ok = (idx >= 0) & (idx < full.size)
        out[ok, j] = full[idx[ok]]
    return TFRMatrix(out, ta, freq_params.freq_axis, "exact")
