# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: per-cell Gaussian inner products and the spectral
autocorrelation sum.  Same results as ``_kernels_py`` up to rounding; each
output cell is summed in a fixed order by one thread, so results do not
depend on the thread count.

``wrap_f`` treats the frequency axis of ``values`` as periodic."""
import numpy as np
cimport numpy as cnp
from cython.parallel cimport prange
from libc.math cimport exp, ceil, floor

cnp.import_array()


def gaussian_cells(const double[:, ::1] values, double t0, double dt,
                   double f0, double df,
                   const double[::1] mu_t, const double[::1] mu_f,
                   const double[::1] ptt, const double[::1] ptf,
                   const double[::1] pff, const double[::1] ht,
                   const double[::1] hf, int wrap_f=0, int nthreads=1):
    cdef Py_ssize_t ncell = mu_t.shape[0]
    cdef Py_ssize_t nt = values.shape[0], nf = values.shape[1]
    sums_arr = np.zeros(ncell, dtype=np.float64)
    mass_arr = np.zeros(ncell, dtype=np.float64)
    cdef double[::1] sums = sums_arr
    cdef double[::1] mass = mass_arr
    cdef Py_ssize_t c, i, j, jj, i0, i1, j0, j1
    cdef double a, b, w, acc, tot, qa, qb
    for c in prange(ncell, nogil=True, num_threads=nthreads, schedule="static"):
        i0 = <Py_ssize_t>ceil((mu_t[c] - ht[c] - t0) / dt)
        i1 = <Py_ssize_t>floor((mu_t[c] + ht[c] - t0) / dt)
        j0 = <Py_ssize_t>ceil((mu_f[c] - hf[c] - f0) / df)
        j1 = <Py_ssize_t>floor((mu_f[c] + hf[c] - f0) / df)
        acc = 0.0
        tot = 0.0
        for i in range(i0, i1 + 1):
            a = t0 + i * dt - mu_t[c]
            qa = ptt[c] * a * a
            for j in range(j0, j1 + 1):
                b = f0 + j * df - mu_f[c]
                w = exp(-(qa + 2.0 * ptf[c] * a * b + pff[c] * b * b))
                tot = tot + w
                if i < 0 or i >= nt:
                    continue
                jj = j
                if wrap_f:
                    jj = j % nf
                    if jj < 0:
                        jj = jj + nf
                if jj >= 0 and jj < nf:
                    acc = acc + w * values[i, jj]
        sums[c] = acc
        mass[c] = tot
    return sums_arr, mass_arr


def spectral_autocorr(const double complex[:, ::1] stft, const double[::1] weights,
                      const long[::1] kidx, int nthreads=1):
    cdef Py_ssize_t nt = stft.shape[0], m = stft.shape[1]
    cdef Py_ssize_t nk = kidx.shape[0], nd = weights.shape[0]
    out_arr = np.zeros((nt, nk), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t t, j, d, kp, km
    cdef double acc
    cdef double complex p, q
    for t in prange(nt, nogil=True, num_threads=nthreads, schedule="static"):
        for j in range(nk):
            p = stft[t, kidx[j]]
            acc = weights[0] * (p.real * p.real + p.imag * p.imag)
            for d in range(1, nd):
                kp = (kidx[j] + d) % m
                km = (kidx[j] - d) % m
                if km < 0:
                    km = km + m
                p = stft[t, kp]
                q = stft[t, km]
                acc = acc + 2.0 * weights[d] * (p.real * q.real + p.imag * q.imag)
            out[t, j] = acc
    return out_arr
