"""Quadratic-cost discrete Wigner-Ville distribution and Cohen-class smoothing.

Conventions: integer lag ``m`` stands for half the continuous lag, so row
``n`` of the distribution is the length-N DFT of ``x[n+m] * conj(x[n-m])``
and bin ``k`` sits at ``pi * k / N`` rad/sample.  With this layout the
continuous distribution is twice the discrete one, and integrating against
``dt * dw / (2 pi)`` gives the constants below.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import fft as sfft
from scipy import signal as ssig

from .signal import Signal
from .tfr import TFRMatrix
from . import _backend

__all__ = [
    "LAG_SCALE", "norm_constant", "marginal_constant", "lag_products",
    "wvd_direct", "cohen_smooth", "wvd_diagnostics", "wvd_freq_axis",
]

# continuous WV = LAG_SCALE * discrete WV (doubled-lag convention)
LAG_SCALE = 2.0
REALNESS_TOL = 1e-9


def norm_constant(n: int) -> float:
    """``c_norm``: ``c_norm * ||W||_F == ||x||^2`` for analytic inputs."""
    # ||2W||^2 * (pi/N) / (2 pi) = 2 ||W||^2 / N
    return math.sqrt(LAG_SCALE ** 2 / (2.0 * n))


def marginal_constant(n: int) -> float:
    """``c_m``: ``c_m * sum_k W[n, k] == |x[n]|^2``."""
    # 2W * (pi/N) / (2 pi)
    return LAG_SCALE * (math.pi / n) / (2.0 * math.pi)


def wvd_freq_axis(n: int) -> np.ndarray:
    return math.pi * np.arange(n) / n


def lag_products(x: np.ndarray, boundary: str = "zero") -> np.ndarray:
    """``R[n, m mod N] = x[n+m] conj(x[n-m])``.

    ``boundary="zero"`` keeps only lags with both indices inside the record;
    ``"periodic"`` wraps indices (for signals periodic in N).
    """
    x = np.asarray(x, dtype=np.complex128)
    n = x.size
    r = np.zeros((n, n), dtype=np.complex128)
    idx = np.arange(n)
    if boundary == "periodic":
        for m in range(n):
            r[:, m] = x[(idx + m) % n] * np.conj(x[(idx - m) % n])
        return r
    if boundary != "zero":
        raise ValueError(f"unknown boundary mode {boundary!r}")
    for m in range(0, (n - 1) // 2 + 1):
        rows = idx[m: n - m]
        prod = x[rows + m] * np.conj(x[rows - m])
        r[rows, m] = prod
        if m:
            r[rows, n - m] = np.conj(prod)
    return r


def wvd_direct(x: Signal, boundary: str = "zero", return_residue: bool = False):
    """Discrete WVD of ``x`` as an N x N ``TFRMatrix`` (rows = samples).

    The lag-product DFT is real up to rounding; the imaginary residue is
    checked against ``1e-9 * max`` and dropped.
    """
    if x.n < 2:
        raise ValueError("WVD needs at least 2 samples")
    n = x.n
    spec = sfft.fft(lag_products(x.samples, boundary), axis=1, workers=_backend.threads())
    peak = float(np.max(np.abs(spec.real))) if spec.size else 0.0
    residue = float(np.max(np.abs(spec.imag))) if spec.size else 0.0
    if residue > REALNESS_TOL * max(peak, np.finfo(float).tiny):
        raise ArithmeticError(f"WVD imaginary residue {residue:.3g} exceeds tolerance")
    out = TFRMatrix(spec.real, np.arange(n, dtype=np.float64), wvd_freq_axis(n), "exact")
    if return_residue:
        return out, residue / peak if peak else 0.0
    return out


def cohen_smooth(w: TFRMatrix, kernel: np.ndarray, freq_boundary: str = "zero") -> TFRMatrix:
    """2D convolution of ``w`` with an odd-sized real kernel, same shape as
    ``w``.  Time is zero-padded; ``freq_boundary="periodic"`` wraps the
    frequency axis (the discrete WVD repeats with period pi in frequency)."""
    k = np.asarray(kernel, dtype=np.float64)
    if k.ndim != 2 or k.shape[0] % 2 == 0 or k.shape[1] % 2 == 0:
        raise ValueError("kernel must be 2D with odd dimensions")
    if not np.all(np.isfinite(k)):
        raise ValueError("kernel must be finite")
    t, f = w.shape
    if k.shape[0] > 2 * t or k.shape[1] > 2 * f:
        raise ValueError(f"kernel {k.shape} larger than twice the grid {w.shape}")
    if freq_boundary == "zero":
        out = ssig.convolve(w.values, k, mode="same", method="auto")
    elif freq_boundary == "periodic":
        hf = k.shape[1] // 2
        padded = np.pad(w.values, ((0, 0), (hf, hf)), mode="wrap")
        out = ssig.convolve(padded, k, mode="same", method="auto")[:, hf:hf + f]
    else:
        raise ValueError(f"unknown frequency boundary {freq_boundary!r}")
    return w.with_values(out, "cohen")


def wvd_diagnostics(w: TFRMatrix, x: Signal) -> dict:
    """Norm identity, marginal and positivity figures for a WVD of ``x``."""
    n = x.n
    if w.shape != (n, n):
        raise ValueError(f"WVD shape {w.shape} does not match signal length {n}")
    v = w.values
    fro = float(np.linalg.norm(v))
    energy = x.energy
    marg = v.sum(axis=1) * marginal_constant(n)
    return {
        "frobenius_norm": fro,
        "normalized_norm": fro * norm_constant(n),
        "norm_ratio": fro * norm_constant(n) / energy if energy else 0.0,
        "min_value": float(v.min()) if energy else 0.0,
        "max_value": float(v.max()) if energy else 0.0,
        "time_marginal_error": float(np.max(np.abs(marg - np.abs(x.samples) ** 2))),
    }
