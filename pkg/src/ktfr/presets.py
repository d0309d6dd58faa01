"""Kernel grids that recover classical transforms.

The scale law ``s(f) = 2^(S (1 - f / pi))`` runs from ``2^S`` at ``f = 0`` to
1 at ``f = pi``.  Scale-based presets center the kernel of output column
``f`` at ``pi / s(f)`` rad/sample (scale 1 is the top of the band) and
set its spreads to ``s(f) sigma0`` in time and ``1 / (s(f) sigma0)`` in
frequency, so every cell is a minimum-uncertainty Gabor atom.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kernels import KernelGrid

__all__ = ["PRESETS", "Preset", "scale_law", "preset_params", "preset_table"]

PRESETS = ("spectrogram", "mel_spectrogram", "scalogram", "scattering_layer", "chirpogram")


def scale_law(f, S: float):
    """``2^(S (1 - f / pi))``."""
    return np.power(2.0, S * (1.0 - np.asarray(f, dtype=np.float64) / math.pi))


@dataclass(frozen=True)
class Preset:
    """``sigma`` is the fixed time spread (spectrogram, mel) or the base
    spread ``sigma0`` (scale presets); ``S`` is the largest scale exponent,
    ``widen`` the scattering time widening and ``chirp`` the kernel
    correlation ``rho / (sigma_t sigma_f)`` used by the chirpogram."""

    name: str
    sigma: float = 3.0
    S: float = 2.0
    widen: float = 2.0
    chirp: float = 0.5

    def __post_init__(self):
        if self.name not in PRESETS:
            raise ValueError(f"unknown preset {self.name!r}; choose from {', '.join(PRESETS)}")
        if not (self.sigma > 0 and self.S >= 0 and self.widen > 0):
            raise ValueError("preset hyper-parameters must be positive")
        if not -1.0 < self.chirp < 1.0:
            raise ValueError("chirp correlation must lie in (-1, 1)")


def preset_params(p: Preset, t_out: int, f_out: int, time_axis=None) -> KernelGrid:
    """Time-shared grid on rows ``0..t_out-1`` and columns ``pi k / f_out``."""
    ta = np.arange(t_out, dtype=np.float64) if time_axis is None else np.asarray(time_axis, float)
    if ta.size != t_out:
        raise ValueError("time_axis length must equal t_out")
    f = math.pi * np.arange(f_out) / f_out
    s = scale_law(f, p.S)
    rho = np.zeros(f_out)
    if p.name == "spectrogram":
        mu_f, st, sf = f, np.full(f_out, p.sigma), np.full(f_out, 1.0 / p.sigma)
    elif p.name == "mel_spectrogram":
        mu_f, st, sf = math.pi / s, np.full(f_out, p.sigma), 1.0 / (s * p.sigma)
    else:
        mu_f, st, sf = math.pi / s, s * p.sigma, 1.0 / (s * p.sigma)
        if p.name == "scattering_layer":
            st = st * p.widen
        elif p.name == "chirpogram":
            rho = p.chirp * st * sf
    meta = {"preset": p.name, "scales": s}
    return KernelGrid(ta, f, mu_f, st, sf, rho, shared=True, meta=meta)


def preset_table(p: Preset, f_out: int) -> list[dict]:
    """One record per output frequency (what ``ktfr presets`` prints)."""
    g = preset_params(p, 1, f_out)
    return [{"f": float(g.freq_axis[j]), "scale": float(g.meta["scales"][j]),
             "mu_t": "t", "mu_f": float(g.mu_f[j]), "sigma_t": float(g.sigma_t[j]),
             "sigma_f": float(g.sigma_f[j]), "rho": float(g.rho[j])} for j in range(f_out)]
