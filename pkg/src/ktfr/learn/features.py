"""Time-pooled fast-path features with a cached base smoothing.

For time-shared kernels the time average of ``k_fast`` output is linear in
the cached base TFR ``B``:

    mean_t K[t, j] = sum_{i,k} B[i, k] M_j[i, k]

where ``M_j`` is the residual Gaussian weight of kernel ``j`` averaged over
the output rows.  Changing one kernel therefore only rebuilds one ``M_j``,
which is what keeps finite-difference training cheap.
"""
from __future__ import annotations

import math

import numpy as np

from ..kernels import KERNEL_EPS, precision, truncation_radius
from ..signal import gaussian_taps
from ..stft import _DELTA_FLOOR, WINDOW_EPS, BaseSmoothing, ResidualNotPSDError, smoothed_pwvd

__all__ = ["PooledFeatureEngine"]


class PooledFeatureEngine:
    """Caches ``smoothed_pwvd`` of every signal on a coarse grid.

    ``out_times`` are the output rows that get averaged; ``pad`` extra base
    samples on each side must cover the base window, past which the base
    TFR is exactly zero.
    """

    def __init__(self, signals, base: BaseSmoothing, out_times, hop: int = 16,
                 n_freq: int = 128, pad: int | None = None, eps: float = KERNEL_EPS):
        if not signals:
            raise ValueError("no signals to cache")
        self.base = base
        self.hop = hop
        self.n_freq = n_freq
        self.eps = eps
        self.out_times = np.asarray(out_times, dtype=np.float64)
        half = gaussian_taps(base.window_std, WINDOW_EPS).size // 2
        pad = -(-half // hop) * hop if pad is None else pad
        if pad < half:
            raise ValueError("pad must cover the base window")
        mats = [smoothed_pwvd(x, base, hop=hop, n_freq=n_freq, pad=pad, eps=eps) for x in signals]
        self.time_axis = mats[0].time_axis
        self.dw = math.pi / n_freq
        rows = (self.out_times - self.time_axis[0]) / hop
        if not np.allclose(rows, np.round(rows)):
            raise ValueError("output times must lie on the base row lattice")
        self._out_rows = np.round(rows).astype(np.int64)
        self.values = np.stack([m.values for m in mats])
        self._flat = self.values.reshape(len(mats), -1)

    def __len__(self):
        return self.values.shape[0]

    def weight_map(self, mu_f: float, ctt: float, cff: float, ctf: float) -> np.ndarray:
        """Row-averaged residual weights of one kernel (spreads in samples,
        rad/sample), shape ``(T_base, F_base)``."""
        rtt = ctt - self.base.sigma_t_base ** 2
        rff = cff - self.base.sigma_f_base ** 2
        if rtt < 0 or rff < 0 or rtt * rff < ctf ** 2:
            raise ResidualNotPSDError(
                f"kernel at mu_f={mu_f:.4g} is narrower than the base smoothing")
        rtt += (_DELTA_FLOOR * self.hop) ** 2
        rff += (_DELTA_FLOOR * self.dw) ** 2
        ptt, ptf, pff, _ = (float(v) for v in precision(rtt, rff, ctf))
        ht = float(truncation_radius(rtt, self.eps))
        hf = float(truncation_radius(rff, self.eps))
        reach = int(math.floor(ht / self.hop))
        cols = np.arange(math.ceil((mu_f - hf) / self.dw), math.floor((mu_f + hf) / self.dw) + 1)
        a = (np.arange(-reach, reach + 1) * float(self.hop))[:, None]
        b = (cols * self.dw - mu_f)[None, :]
        w = np.exp(-(ptt * a * a + 2.0 * ptf * a * b + pff * b * b))
        # output rows share the base lattice, so every row has the same mass
        w /= w.sum() * self._out_rows.size
        # base rows past the cache are exactly zero, so the block is cropped
        nt = self.time_axis.size
        box = np.zeros((nt + 2 * reach, cols.size))
        for r in self._out_rows:
            box[r:r + 2 * reach + 1] += w
        box = box[reach:reach + nt]
        out = np.zeros((self.time_axis.size, self.n_freq))
        np.add.at(out.T, cols % self.n_freq, box.T)
        return out

    def rows(self, idx=None) -> np.ndarray:
        """Flattened cached TFRs of the signals ``idx`` (all when ``None``)."""
        if idx is None:
            return self._flat
        idx = np.asarray(idx, dtype=np.int64)
        if idx.size == len(self) and np.array_equal(idx, np.arange(len(self))):
            return self._flat
        return self._flat[idx]

    def pooled(self, maps: np.ndarray, idx=None) -> np.ndarray:
        """``(S, J)`` pooled values for weight maps of shape ``(J, T, F)``."""
        return self.rows(idx) @ maps.reshape(maps.shape[0], -1).T
