"""Pure numpy fallback for the compiled kernels in ``_core.pyx``.

Same signatures and results (to rounding); used when the extension is not
built or when ``KTFR_BACKEND=python``.
"""
import math

import numpy as np


def gaussian_cells(values, t0, dt, f0, df, mu_t, mu_f, ptt, ptf, pff, ht, hf, wrap_f=0,
                   nthreads=1):
    values = np.asarray(values, dtype=np.float64)
    nt, nf = values.shape
    ncell = len(mu_t)
    sums = np.zeros(ncell)
    mass = np.zeros(ncell)
    for c in range(ncell):
        i0 = math.ceil((mu_t[c] - ht[c] - t0) / dt)
        i1 = math.floor((mu_t[c] + ht[c] - t0) / dt)
        j0 = math.ceil((mu_f[c] - hf[c] - f0) / df)
        j1 = math.floor((mu_f[c] + hf[c] - f0) / df)
        if i1 < i0 or j1 < j0:
            continue
        ii = np.arange(i0, i1 + 1)
        jj = np.arange(j0, j1 + 1)
        a = (t0 + ii * dt - mu_t[c])[:, None]
        b = (f0 + jj * df - mu_f[c])[None, :]
        w = np.exp(-(ptt[c] * a * a + 2.0 * ptf[c] * a * b + pff[c] * b * b))
        mass[c] = w.sum()
        ri = (ii >= 0) & (ii < nt)
        if wrap_f:
            jj = jj % nf
        rj = (jj >= 0) & (jj < nf)
        if ri.any() and rj.any():
            sums[c] = np.sum(w[np.ix_(ri, rj)] * values[np.ix_(ii[ri], jj[rj])])
    return sums, mass


def spectral_autocorr(stft, weights, kidx, nthreads=1):
    stft = np.asarray(stft)
    m = stft.shape[1]
    kidx = np.asarray(kidx)
    out = weights[0] * np.abs(stft[:, kidx]) ** 2
    for d in range(1, len(weights)):
        p = stft[:, (kidx + d) % m]
        q = stft[:, (kidx - d) % m]
        out = out + 2.0 * weights[d] * (p.real * q.real + p.imag * q.imag)
    return out
