"""Brute-force reference computations, written without the library code.

Everything here is deliberately slow and literal: plain loops, explicit
sums, textbook formulas.  Values that the library freezes as constants are
derived from these functions in ``frozen.py``.
"""
import cmath
import math

import numpy as np


def wvd_loops(x):
    """``W[n, k] = sum_m x[n+m] conj(x[n-m]) exp(-2 pi i k m / N)``, zero outside."""
    x = [complex(v) for v in x]
    n = len(x)
    out = np.zeros((n, n))
    for t in range(n):
        for k in range(n):
            acc = 0j
            for m in range(-(n - 1), n):
                a, b = t + m, t - m
                if 0 <= a < n and 0 <= b < n:
                    acc += x[a] * x[b].conjugate() * cmath.exp(-2j * math.pi * k * m / n)
            out[t, k] = acc.real
    return out


def tap_count(sigma_seconds, fs, eps):
    """Smallest odd M whose boundary tap of the unit-peak Gaussian is <= eps."""
    s = sigma_seconds * fs
    m = 1
    while True:
        half = (m - 1) // 2
        if half == 0 and m == 1:
            edge = 1.0
        else:
            edge = math.exp(-0.5 * (half / s) ** 2)
        if edge <= eps:
            return m
        m += 2


def neighborhood_sum(values, r_t, r_f):
    """Sum over the ``(2 r_t + 1) x (2 r_f + 1)`` neighborhood, zero outside."""
    t, f = values.shape
    out = np.zeros_like(values, dtype=float)
    for i in range(t):
        for j in range(f):
            s = 0.0
            for a in range(i - r_t, i + r_t + 1):
                for b in range(j - r_f, j + r_f + 1):
                    if 0 <= a < t and 0 <= b < f:
                        s += values[a, b]
            out[i, j] = s
    return out


def stft_direct(x, taps, t, omega):
    """``sum_tau w[t - tau] x[tau] exp(-i omega tau)`` with centered taps."""
    h = (len(taps) - 1) // 2
    acc = 0j
    for u in range(-h, h + 1):
        tau = t + u
        if 0 <= tau < len(x):
            acc += taps[h - u] * x[tau] * cmath.exp(-1j * omega * tau)
    return acc


def eigen_area(st, sf, rho):
    """Product of the eigenvalues of ``[[st, rho], [rho, sf]]`` read as spreads."""
    tr = st + sf
    det = st * sf - rho * rho
    disc = math.sqrt(max(tr * tr / 4 - det, 0.0))
    return (tr / 2 + disc) * (tr / 2 - disc)


def binomial_interval_prob(n, lo, hi, p=0.5):
    """``P(lo <= K / n <= hi)`` for ``K ~ Binomial(n, p)``."""
    total = 0.0
    for k in range(n + 1):
        if lo <= k / n <= hi:
            total += math.comb(n, k) * p ** k * (1 - p) ** (n - k)
    return total


def random_analytic_oracle(n, seed):
    """Analytic random signal built bin by bin (DC and Nyquist empty)."""
    rng = np.random.default_rng(seed)
    spec = np.zeros(n, dtype=complex)
    for k in range(1, (n + 1) // 2):
        spec[k] = complex(rng.standard_normal(), rng.standard_normal())
    x = np.zeros(n, dtype=complex)
    for t in range(n):
        x[t] = sum(spec[k] * cmath.exp(2j * math.pi * k * t / n) for k in range(n)) / math.sqrt(n)
    return x


def gaussian2d_cell(st, sf, rho, tau, w):
    """``exp(-v' C^-1 v) / (pi sqrt(det C))`` by explicit 2x2 inversion."""
    a, b, c = st * st, rho, sf * sf
    det = a * c - b * b
    q = (c * tau * tau - 2 * b * tau * w + a * w * w) / det
    return math.exp(-q) / (math.pi * math.sqrt(det))


def smooth_direct(w, st, sf, rho, dw, reach_t, reach_f, periodic=True):
    """Cohen smoothing by direct summation with a cell-area-weighted Gaussian."""
    t, f = w.shape
    out = np.zeros_like(w)
    for i in range(t):
        for j in range(f):
            acc = 0.0
            for a in range(-reach_t, reach_t + 1):
                ii = i - a
                if not 0 <= ii < t:
                    continue
                for b in range(-reach_f, reach_f + 1):
                    jj = j - b
                    if periodic:
                        jj %= f
                    elif not 0 <= jj < f:
                        continue
                    acc += w[ii, jj] * gaussian2d_cell(st, sf, rho, a, b * dw) * dw
            out[i, j] = acc
    return out
