"""Unconstrained kernel parameters and the maps that keep covariances valid.

Raw values live in normalized units (time in units of ``time_unit`` samples,
frequency in units of ``freq_unit`` rad/sample) so that one optimizer step
means roughly the same thing for both axes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..kernels import KernelGrid

__all__ = ["CONSTRAINT_EPS", "RHO_RAW_CLIP", "UnconstrainedParams", "Covariances", "constrain",
           "to_grid", "from_covariances", "floor_spreads"]

CONSTRAINT_EPS = 1e-3
# tanh(19) rounds to 1.0; clamping at 15 keeps 1 - tanh^2 >= 3.7e-13
RHO_RAW_CLIP = 15.0


@dataclass
class UnconstrainedParams:
    sigma_t_raw: np.ndarray
    sigma_f_raw: np.ndarray
    rho_raw: np.ndarray
    eps: float = CONSTRAINT_EPS

    def __post_init__(self):
        self.sigma_t_raw = np.atleast_1d(np.asarray(self.sigma_t_raw, dtype=np.float64)).copy()
        self.sigma_f_raw = np.atleast_1d(np.asarray(self.sigma_f_raw, dtype=np.float64)).copy()
        self.rho_raw = np.atleast_1d(np.asarray(self.rho_raw, dtype=np.float64)).copy()
        if not (self.sigma_t_raw.shape == self.sigma_f_raw.shape == self.rho_raw.shape):
            raise ValueError("raw parameter arrays must share one shape")
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if not all(np.all(np.isfinite(a)) for a in (self.sigma_t_raw, self.sigma_f_raw, self.rho_raw)):
            raise ValueError("raw parameters must be finite")

    @property
    def size(self) -> int:
        return self.rho_raw.size

    def vector(self) -> np.ndarray:
        """Flat ``[st_0, sf_0, rho_0, st_1, ...]`` view used by the optimizer."""
        return np.stack([self.sigma_t_raw, self.sigma_f_raw, self.rho_raw], axis=-1).ravel()

    @classmethod
    def from_vector(cls, v, eps=CONSTRAINT_EPS) -> "UnconstrainedParams":
        v = np.asarray(v, dtype=np.float64).reshape(-1, 3)
        return cls(v[:, 0], v[:, 1], v[:, 2], eps)


@dataclass(frozen=True)
class Covariances:
    """Covariance entries in the raw (normalized) units."""

    ctt: np.ndarray
    cff: np.ndarray
    ctf: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def det(self) -> np.ndarray:
        return self.ctt * self.cff - self.ctf ** 2


def constrain(u: UnconstrainedParams) -> Covariances:
    """``ctt = |st_raw| + eps``, ``cff = |sf_raw| + eps``,
    ``ctf = tanh(rho_raw) sqrt(ctt cff)``; ``det = ctt cff (1 - tanh^2) > 0``.
    ``rho_raw`` is clamped to ``+-RHO_RAW_CLIP`` so the correlation stays
    strictly inside (-1, 1) in floating point."""
    ctt = np.abs(u.sigma_t_raw) + u.eps
    cff = np.abs(u.sigma_f_raw) + u.eps
    ctf = np.tanh(np.clip(u.rho_raw, -RHO_RAW_CLIP, RHO_RAW_CLIP)) * np.sqrt(ctt * cff)
    return Covariances(ctt, cff, ctf)


def to_grid(cov: Covariances, mu_f, time_axis, freq_axis, time_unit: float,
            freq_unit: float) -> KernelGrid:
    """Time-shared grid in samples / rad-per-sample from normalized covariances."""
    ctt = cov.ctt * time_unit ** 2
    cff = cov.cff * freq_unit ** 2
    ctf = cov.ctf * time_unit * freq_unit
    return KernelGrid(time_axis, freq_axis, mu_f, np.sqrt(ctt), np.sqrt(cff), ctf, shared=True)


def from_covariances(sigma_t, sigma_f, corr, time_unit: float, freq_unit: float,
                     eps: float = CONSTRAINT_EPS) -> UnconstrainedParams:
    """Raw parameters reproducing spreads (samples, rad/sample) and correlation."""
    st_raw = (np.asarray(sigma_t, float) / time_unit) ** 2 - eps
    sf_raw = (np.asarray(sigma_f, float) / freq_unit) ** 2 - eps
    if np.any(st_raw < 0) or np.any(sf_raw < 0):
        raise ValueError("spreads below the constraint floor")
    corr = np.broadcast_to(np.asarray(corr, float), st_raw.shape)
    if np.any(np.abs(corr) >= 1):
        raise ValueError("correlation must lie in (-1, 1)")
    return UnconstrainedParams(st_raw, sf_raw, np.arctanh(corr), eps)


def floor_spreads(time_unit: float, freq_unit: float, eps: float = CONSTRAINT_EPS):
    """Smallest reachable spreads (samples, rad/sample)."""
    return time_unit * math.sqrt(eps), freq_unit * math.sqrt(eps)
