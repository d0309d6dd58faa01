"""Gabor STFT, spectrogram and the fast smoothed-WVD substrate.

The fast route computes a smoothed pseudo-WVD as a weighted spectral
autocorrelation of a Gaussian-window STFT:

    P[t, k] = sum_d c_d S(t, w_k + eta_d / 2) conj(S(t, w_k - eta_d / 2))

with frame-local phase, window spread ``1 / sigma_f`` and Gaussian weights
``c_d`` over the offsets.  Folded onto the half circle (``P(w) + P(w + pi)``)
it equals the discrete WVD smoothed by the base Gaussian
``exp(-tau^2 / st^2 - w^2 / sf^2)`` up to the factor ``2 sqrt(pi) st``
(see ``alignment_constant``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft

from . import _backend
from .kernels import KERNEL_EPS, KernelGrid, precision, truncation_radius
from .signal import Signal, gaussian_taps, gaussian_window
from .tfr import ComplexTFR, TFRMatrix

__all__ = [
    "WINDOW_EPS", "BaseSmoothing", "BasePreconditionError", "ResidualNotPSDError",
    "stft_gabor", "spectrogram", "smoothed_pwvd", "residual_smooth_sample",
    "alignment_constant", "parseval_constant", "offset_weights", "fft_plan",
]

WINDOW_EPS = 1e-6
# residual spreads below this fraction of a grid step are numerically a delta
_DELTA_FLOOR = 0.05


class BasePreconditionError(ValueError):
    """Base smoothing outside the domain of the spectral-autocorrelation route."""


class ResidualNotPSDError(ValueError):
    """A kernel is narrower than the base smoothing; use ``k_exact``."""


@dataclass(frozen=True)
class BaseSmoothing:
    """Separable base smoothing, spreads in samples and rad/sample."""

    sigma_t_base: float
    sigma_f_base: float

    def __post_init__(self):
        if not (self.sigma_t_base > 0 and self.sigma_f_base > 0):
            raise ValueError("base spreads must be positive")
        if self.sigma_t_base * self.sigma_f_base > 1.0 + 1e-12:
            raise BasePreconditionError(
                "base smoothing precondition violated: need sigma_t_base <= 1 / sigma_f_base "
                f"(got {self.sigma_t_base:g} * {self.sigma_f_base:g} > 1)")

    @property
    def window_std(self) -> float:
        """STFT window standard deviation in samples."""
        return 1.0 / self.sigma_f_base

    @property
    def offset_std(self) -> float:
        """Standard deviation (rad/sample) of the offset weights."""
        g2 = 2.0 * (1.0 / self.sigma_t_base ** 2 - self.sigma_f_base ** 2)
        return math.sqrt(max(g2, 0.0))


def alignment_constant(base: BaseSmoothing) -> float:
    """Factor mapping the raw autocorrelation sum onto the Riemann-sampled
    Cohen smoothing of the WVD."""
    return 1.0 / (2.0 * math.sqrt(math.pi) * base.sigma_t_base)


def parseval_constant(n_fft: int) -> float:
    """``c_s`` with ``c_s sum |S|^2 = ||x||^2 ||w||^2`` for ``stft_gabor(...,
    span="full", hop=1)``: every (sample, tap) pair appears once per bin."""
    return 1.0 / n_fft


def fft_plan(n_freq: int, half_window: int) -> tuple[int, int]:
    """FFT size ``M = 2 * n_freq * r`` and stride ``r`` so that output bin
    ``k`` (at ``pi k / n_freq``) is FFT bin ``k r`` and ``M / 2 >= 4 h``."""
    r = max(1, math.ceil(4 * half_window / n_freq))
    return 2 * n_freq * r, r


def offset_weights(g: float, m: int, eps: float = KERNEL_EPS) -> np.ndarray:
    """One-sided weights ``c_0..c_D`` of a Gaussian of std ``g`` over offsets
    ``eta_d = 4 pi d / M``, truncated below ``eps`` of the peak and normalized
    so that ``c_0 + 2 sum c_d = 1``."""
    if g <= 0:
        return np.ones(1)
    step = 4.0 * math.pi / m
    dmax = int(math.floor(g * math.sqrt(2.0 * math.log(1.0 / eps)) / step))
    dmax = min(dmax, m // 4)
    eta = step * np.arange(dmax + 1)
    c = np.exp(-0.5 * (eta / g) ** 2)
    return c / (c[0] + 2.0 * c[1:].sum())


def _frames_fft(x: np.ndarray, taps: np.ndarray, times: np.ndarray, m: int) -> np.ndarray:
    """Frame-local FFT: ``out[i, j] = sum_u w[u] x[t_i + u] e^{-2 pi i j u / m}``."""
    h = taps.size // 2
    if taps.size > m:
        raise ValueError(f"window of {taps.size} taps longer than the padded frame ({m})")
    n = x.size
    lo = int(times.min()) - h
    pad_l = max(0, -lo)
    pad_r = max(0, int(times.max()) + h - (n - 1))
    xp = np.concatenate([np.zeros(pad_l, complex), x, np.zeros(pad_r, complex)])
    u = np.arange(-h, h + 1)
    idx = times.astype(np.int64)[:, None] + u[None, :] + pad_l
    frames = np.zeros((times.size, m), dtype=np.complex128)
    frames[:, u % m] = xp[idx] * taps[None, :]
    return sfft.fft(frames, axis=1, workers=_backend.threads())


def _time_grid(n: int, hop: int, span: str, extra: int = 0) -> np.ndarray:
    if hop < 1:
        raise ValueError("hop must be >= 1")
    if span == "same":
        lo, hi = -extra, n - 1 + extra
    elif span == "full":
        lo, hi = -extra, n - 1 + extra
    else:
        raise ValueError(f"unknown span {span!r}")
    return np.arange(lo, hi + 1, hop)


def stft_gabor(x: Signal, sigma: float, hop: int = 1, eps: float = WINDOW_EPS,
               n_fft: int | None = None, span: str = "same",
               phase: str = "absolute") -> ComplexTFR:
    """Gaussian-window STFT over the full frequency circle.

    ``sigma`` is the window spread in seconds.  Bins sit at ``2 pi j / n_fft``
    (the analysis band [0, pi] is the first half).  ``span="full"`` also
    emits the frames overhanging the record by up to half a window, which is
    what makes the Parseval identity exact.  ``phase="absolute"`` gives
    ``sum_tau w[t - tau] x[tau] e^{-i w tau}``; ``"local"`` drops the
    ``e^{-i w t}`` factor.
    """
    win = gaussian_window(sigma, eps, x.sample_rate_hz)
    taps = np.asarray(win.taps)
    h = win.half
    if n_fft is None:
        n_fft = 2 * max(x.n, taps.size)
    times = _time_grid(x.n, hop, span, h if span == "full" else 0)
    s = _frames_fft(x.samples, taps, times, n_fft)
    freqs = 2.0 * math.pi * np.arange(n_fft) / n_fft
    if phase == "absolute":
        s = s * np.exp(-1j * np.outer(times, freqs))
    elif phase != "local":
        raise ValueError(f"unknown phase convention {phase!r}")
    return ComplexTFR(s, times.astype(np.float64), freqs, sigma)


def spectrogram(x: Signal, sigma: float, hop: int = 1, n_freq: int | None = None,
                eps: float = WINDOW_EPS) -> TFRMatrix:
    """``|STFT|^2`` on the WVD-style grid: rows every ``hop`` samples,
    columns at ``pi k / n_freq``."""
    n_freq = n_freq or x.n
    taps = gaussian_taps(sigma * x.sample_rate_hz, eps)
    m, r = fft_plan(n_freq, taps.size // 2)
    times = _time_grid(x.n, hop, "same")
    s = _frames_fft(x.samples, taps, times, m)[:, ::r][:, :n_freq]
    return TFRMatrix(np.abs(s) ** 2, times.astype(np.float64),
                     math.pi * np.arange(n_freq) / n_freq, "spectrogram")


def smoothed_pwvd(x: Signal, base: BaseSmoothing, hop: int = 1, n_freq: int | None = None,
                  pad: int = 0, eps: float = KERNEL_EPS, raw: bool = False,
                  fold: bool = True) -> TFRMatrix:
    """WVD smoothed by the base Gaussian via spectral autocorrelation.

    Rows are emitted for ``t = -pad .. N-1+pad`` every ``hop`` samples and
    columns at ``pi k / n_freq``.  With ``raw=False`` the result is scaled by
    ``alignment_constant`` to match ``cohen_smooth(wvd_direct(x), K)`` where
    ``K`` is the base kernel sampled with cell area.

    The autocorrelation sum mixes even-lag terms (period pi in frequency,
    the ones the discrete WVD holds) with odd-lag terms, which flip sign
    under ``w -> w + pi``.  ``fold=True`` returns ``P(w) + P(w + pi)``,
    which cancels the odd-lag terms exactly.
    """
    n_freq = n_freq or x.n
    taps = gaussian_taps(base.window_std, WINDOW_EPS)
    m, r = fft_plan(n_freq, taps.size // 2)
    times = _time_grid(x.n, hop, "same", pad)
    weights = offset_weights(base.offset_std, m, eps)
    kidx = np.arange(n_freq, dtype=np.int64) * r
    if fold:
        kidx = np.concatenate([kidx, kidx + m // 2])
    out = np.empty((times.size, n_freq))
    # chunk the frames to bound the size of the STFT buffer
    chunk = max(1, int(2 ** 24 // m))
    for i0 in range(0, times.size, chunk):
        s = _frames_fft(x.samples, taps, times[i0:i0 + chunk], m)
        a = _backend.spectral_autocorr(s, weights, kidx)
        out[i0:i0 + chunk] = a[:, :n_freq] + a[:, n_freq:] if fold else a
    if not raw:
        out *= alignment_constant(base)
    return TFRMatrix(out, times.astype(np.float64), math.pi * np.arange(n_freq) / n_freq, "fast")


def _residuals(grid: KernelGrid, base: BaseSmoothing, tol: float = 1e-12):
    mt, mf, st, sf, rho = (np.ascontiguousarray(a, dtype=np.float64).ravel() for a in grid.cells())
    rtt = st ** 2 - base.sigma_t_base ** 2
    rff = sf ** 2 - base.sigma_f_base ** 2
    det = rtt * rff - rho ** 2
    scale = st ** 2 * sf ** 2
    bad = (rtt < -tol * st ** 2) | (rff < -tol * sf ** 2) | (det < -1e-9 * scale)
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise ResidualNotPSDError(
            "kernel narrower than base smoothing at cell "
            f"{np.unravel_index(i, grid.shape)}: residual covariance not PSD; use k_exact")
    return mt, mf, np.maximum(rtt, 0.0), np.maximum(rff, 0.0), rho


def residual_smooth_sample(base_tfr: TFRMatrix, base: BaseSmoothing, grid: KernelGrid,
                           eps: float = KERNEL_EPS, freq_boundary: str = "periodic") -> TFRMatrix:
    """Smooth ``base_tfr`` by each cell's residual Gaussian ``C - C_base``,
    centered at the cell's ``(mu_t, mu_f)``.

    Weights are normalized by their sum over the full (unclipped) lattice so
    that rows outside ``base_tfr`` count as zero; the frequency axis wraps
    unless ``freq_boundary="zero"``.  Residual spreads well below the grid
    step act as sampling at the nearest grid point.
    """
    if freq_boundary not in ("periodic", "zero"):
        raise ValueError(f"unknown frequency boundary {freq_boundary!r}")
    mt, mf, rtt, rff, rtf = _residuals(grid, base)
    dt = base_tfr.dt
    dw = base_tfr.dw
    rtt = rtt + (_DELTA_FLOOR * dt) ** 2
    rff = rff + (_DELTA_FLOOR * dw) ** 2
    ptt, ptf, pff, _ = precision(rtt, rff, rtf)
    ht = truncation_radius(rtt, eps)
    hf = truncation_radius(rff, eps)
    sums, mass = _backend.gaussian_cells(
        np.ascontiguousarray(base_tfr.values), float(base_tfr.time_axis[0]), dt,
        float(base_tfr.freq_axis[0]), dw, mt, mf, ptt, ptf, pff, ht, hf,
        freq_boundary == "periodic")
    out = np.where(mass > 0, sums / np.where(mass > 0, mass, 1.0), 0.0)
    return TFRMatrix(out.reshape(grid.shape), grid.time_axis, grid.freq_axis, "fast")
