"""Interference, logon-area and parameter-stability diagnostics."""
from __future__ import annotations

import math

import numpy as np

from .kernels import KernelGrid, KernelParams
from .ktransform import k_exact
from .signal import Signal
from .tfr import TFRMatrix
from .wvd import wvd_direct

__all__ = [
    "NONNEG_TOL", "LOGON_THRESHOLD", "LOGON_RTOL", "KAPPA", "interference_report", "logon_area",
    "lipschitz_bound", "gaussian_slope_constant", "logon_summary",
]

NONNEG_TOL = 1e-6
LOGON_THRESHOLD = 1.0 / (4.0 * math.pi)
# a few ulps, so the equality case (1 / (2 sqrt(pi)))^2 is not lost to rounding
LOGON_RTOL = 4.0 * np.finfo(float).eps
# Lipschitz constant of the standard Gaussian quoted with the bound
KAPPA = 0.2422


def gaussian_slope_constant() -> float:
    """``max |phi'|`` of the standard normal density, ``1 / sqrt(2 pi e)``;
    the numeric source of ``KAPPA``."""
    return 1.0 / math.sqrt(2.0 * math.pi * math.e)


def interference_report(k: TFRMatrix | np.ndarray, tol: float = NONNEG_TOL) -> dict:
    """Nonnegativity check: passes when ``min >= -tol * max``."""
    v = np.asarray(k.values if isinstance(k, TFRMatrix) else k, dtype=np.float64)
    lo = float(v.min()) if v.size else 0.0
    hi = float(v.max()) if v.size else 0.0
    floor = -tol * max(hi, 0.0)
    return {
        "min_value": lo,
        "max_value": hi,
        "negative_fraction": float(np.mean(v < floor)) if v.size else 0.0,
        "passes_nonnegativity": bool(lo >= floor),
    }


def _rotation_angle(st: float, sf: float, rho: float) -> float:
    if st == sf:
        return math.pi / 4 if rho != 0 else 0.0
    return math.atan(2.0 * rho / (st - sf)) / 2.0


def logon_area(p: KernelParams) -> dict:
    """Rotated spreads of ``[[sigma_t, rho], [rho, sigma_f]]`` that remove the
    chirp term, and the uncertainty check ``sT' sF' >= 1 / (4 pi)``."""
    st, sf, rho = p.sigma_t, p.sigma_f, p.rho
    th = _rotation_angle(st, sf, rho)
    c, s = math.cos(th), math.sin(th)
    st_r = st * c * c + 2.0 * rho * c * s + sf * s * s
    sf_r = st * s * s - 2.0 * rho * c * s + sf * c * c
    area = st_r * sf_r
    return {"sigma_t_rot": st_r, "sigma_f_rot": sf_r, "theta": th, "area": area,
            "threshold": LOGON_THRESHOLD,
            "passes": bool(area >= LOGON_THRESHOLD * (1.0 - LOGON_RTOL))}


def logon_summary(grid: KernelGrid) -> dict:
    """Per-cell logon check over a grid."""
    _, _, st, sf, rho = (np.asarray(a, dtype=np.float64).ravel() for a in grid.cells())
    areas = np.array([logon_area(KernelParams(0.0, 0.0, a, b, r))["area"]
                      for a, b, r in zip(st, sf, rho)])
    return {"cells": int(areas.size), "min_area": float(areas.min()),
            "max_area": float(areas.max()), "threshold": LOGON_THRESHOLD,
            "fraction_passing": float(np.mean(areas >= LOGON_THRESHOLD * (1.0 - LOGON_RTOL)))}


def lipschitz_bound(g1: KernelGrid, g2: KernelGrid, x: Signal, kappa: float = KAPPA,
                    **kw) -> dict:
    """Compare ``||K_g1 - K_g2||_F`` against ``kappa ||x||^2 / sqrt(sum ||theta - theta'||^2)``."""
    if g1.shape != g2.shape:
        raise ValueError(f"grid shapes differ: {g1.shape} vs {g2.shape}")
    w = wvd_direct(x) if not x.is_real else None
    k1 = k_exact(x, g1, wvd=w, **kw).values
    k2 = k_exact(x, g2, wvd=w, **kw).values
    lhs = float(np.linalg.norm(k1 - k2))
    dist2 = float(np.sum((g1.theta() - g2.theta()) ** 2))
    rhs = math.inf if dist2 == 0 else kappa * x.energy / math.sqrt(dist2)
    # the printed inequality bounds the squared norm; both readings are reported
    return {"lhs": lhs, "lhs_squared": lhs * lhs, "rhs": rhs, "param_distance": math.sqrt(dist2),
            "holds": bool(lhs <= rhs * (1.0 + 1e-6)),
            "holds_squared": bool(lhs * lhs <= rhs * (1.0 + 1e-6))}
