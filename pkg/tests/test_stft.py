import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.signal import convolve

import frozen as FZ
from ktfr import (BasePreconditionError, BaseSmoothing, KernelGrid, ResidualNotPSDError, Signal,
                  SignalSpec, cohen_smooth, k_exact, k_fast, residual_smooth_sample,
                  smoothed_pwvd, spectrogram, stft_gabor, synth, wvd_direct)
from ktfr.cli import relative_errors
from ktfr.kernels import sampled_kernel
from ktfr.signal import random_analytic
from ktfr.stft import alignment_constant, offset_weights, parseval_constant


def rel(a, b):
    return relative_errors(np.asarray(a), np.asarray(b))[0]


def test_tone_spectrogram_argmax():
    n = 256
    w0 = 0.37 * math.pi
    x = synth(SignalSpec("tone", n, params={"omega": w0}))
    s = spectrogram(x, 6.0)
    k_near = int(round(w0 / s.dw))
    interior = slice(40, n - 40)
    assert np.all(np.argmax(s.values[interior], axis=1) == k_near)
    full = stft_gabor(x, 6.0)
    j_near = int(round(w0 / (2 * math.pi) * full.values.shape[1]))
    assert np.all(np.argmax(np.abs(full.values[interior]), axis=1) == j_near)


def test_zero_signal():
    x = Signal(np.zeros(32, dtype=complex))
    assert not np.any(stft_gabor(x, 2.0).values)
    assert not np.any(smoothed_pwvd(x, BaseSmoothing(2.0, 0.3)).values)


def test_window_longer_than_frame():
    with pytest.raises(ValueError, match="longer than the padded frame"):
        stft_gabor(random_analytic(32, 0), 10.0, n_fft=16)


def test_absolute_and_local_phase_agree_in_modulus():
    x = random_analytic(48, 3)
    a = stft_gabor(x, 3.0, phase="absolute").values
    b = stft_gabor(x, 3.0, phase="local").values
    assert np.allclose(np.abs(a), np.abs(b), atol=1e-12)


@pytest.mark.parametrize("seed", range(3))
def test_parseval(seed):
    rng = np.random.default_rng(seed)
    x = Signal(rng.standard_normal(40) + 1j * rng.standard_normal(40))
    n_fft = 128
    s = stft_gabor(x, 2.0, n_fft=n_fft, span="full")
    taps = np.exp(-0.5 * (np.arange(-(s.values.shape[0] - 40) // 2,
                                    (s.values.shape[0] - 40) // 2 + 1) / 2.0) ** 2)
    lhs = parseval_constant(n_fft) * np.sum(np.abs(s.values) ** 2)
    assert lhs == pytest.approx(x.energy * np.sum(taps ** 2), rel=1e-12)


def test_parseval_constant_frozen():
    assert parseval_constant(64) == pytest.approx(1.0 / FZ.PARSEVAL_RATIO_64, rel=1e-12)


# ---------------------------------------------------------- smoothed pwvd --

def test_alignment_constant_frozen():
    assert alignment_constant(BaseSmoothing(2.0, 0.3)) == pytest.approx(FZ.ALIGNMENT_2_03, rel=1e-4)


@pytest.mark.parametrize("base", [(2.0, 0.3), (3.0, 0.2), (5.0, 0.1)])
def test_equivalence_with_cohen_smoothing(base):
    n = 128
    b = BaseSmoothing(*base)
    x = random_analytic(n, 11)
    ref = cohen_smooth(wvd_direct(x), sampled_kernel(*base, dt=1.0, dw=math.pi / n),
                       freq_boundary="periodic")
    out = smoothed_pwvd(x, b)
    assert np.max(np.abs(out.values - ref.values)) <= 1e-2 * np.max(np.abs(ref.values))


@pytest.mark.parametrize("sigma", [3.0, 4.0])
def test_spectrogram_limit(sigma):
    # at sigma_t = 1 / sigma_f the offset window collapses to one term;
    # guard band keeps the pi-aliased copy out of the comparison
    x = random_analytic(128, 2, band=(0.25, 0.75), taper=0.25)
    b = smoothed_pwvd(x, BaseSmoothing(sigma, 1.0 / sigma)).values
    sp = spectrogram(x, sigma).values / (2.0 * math.sqrt(math.pi) * sigma)
    assert np.max(np.abs(b - sp)) <= 1e-3 * np.max(np.abs(sp))
    assert b.min() >= -1e-6 * b.max()


def test_offset_weights_collapse_and_normalize():
    assert np.array_equal(BaseSmoothing(4.0, 0.25).offset_std * np.ones(1), [0.0])
    assert np.array_equal(offset_weights(0.0, 64), [1.0])
    c = offset_weights(0.5, 256)
    assert c[0] + 2 * c[1:].sum() == pytest.approx(1.0, abs=1e-15)


def test_base_precondition():
    with pytest.raises(BasePreconditionError, match="precondition"):
        BaseSmoothing(4.0, 0.5)
    with pytest.raises(ValueError):
        BaseSmoothing(-1.0, 0.1)


def test_hop_and_pad_rows():
    x = random_analytic(64, 0)
    full = smoothed_pwvd(x, BaseSmoothing(2.0, 0.3), pad=8)
    sub = smoothed_pwvd(x, BaseSmoothing(2.0, 0.3), hop=4, pad=8)
    assert full.time_axis[0] == -8 and full.time_axis[-1] == 71
    assert np.allclose(sub.values, full.values[::4], atol=1e-12 * np.abs(full.values).max())


# --------------------------------------------------------------- residual --

def test_zero_residual_samples_the_base():
    x = random_analytic(64, 1)
    base = BaseSmoothing(3.0, 0.2)
    bt = smoothed_pwvd(x, base)
    g = KernelGrid(bt.time_axis, bt.freq_axis, np.tile(bt.freq_axis, (64, 1)), 3.0, 0.2, 0.0)
    assert np.array_equal(residual_smooth_sample(bt, base, g).values, bt.values)


@pytest.mark.parametrize("seed", range(3))
def test_random_psd_residuals_match_exact(seed):
    n = 64
    rng = np.random.default_rng(seed)
    base = BaseSmoothing(2.0, 0.1)
    ta = np.arange(n, dtype=float)
    fa = math.pi * np.arange(n) / n
    st_ = rng.uniform(2.5, 6.0, (n, n))
    sf_ = rng.uniform(0.15, 0.4, (n, n))
    corr = rng.uniform(-0.4, 0.4, (n, n))
    # residual det >= 0 for these ranges: spreads exceed base by >= 25 %
    g = KernelGrid(ta, fa, np.tile(fa, (n, 1)), st_, sf_, corr * (st_ ** 2 - 4.0) ** 0.5
                   * (sf_ ** 2 - 0.01) ** 0.5)
    x = random_analytic(n, 50 + seed)
    assert rel(k_exact(x, g).values, k_fast(x, g, base).values) <= 1e-2


def test_narrow_kernel_raises():
    x = random_analytic(32, 0)
    base = BaseSmoothing(3.0, 0.2)
    bt = smoothed_pwvd(x, base)
    g = KernelGrid(bt.time_axis, bt.freq_axis, np.tile(bt.freq_axis, (32, 1)), 2.0, 0.3, 0.0)
    with pytest.raises(ResidualNotPSDError, match="kernel narrower than base smoothing"):
        residual_smooth_sample(bt, base, g)


# -------------------------------------------------------------- semigroup --

@settings(max_examples=20, deadline=None)
@given(a_t=st.floats(2.5, 4.0), a_f=st.floats(2.5, 4.0), b_t=st.floats(2.5, 4.0),
       b_f=st.floats(2.5, 4.0), corr=st.floats(-0.6, 0.6))
def test_gaussian_semigroup(a_t, a_f, b_t, b_f, corr):
    """Smoothing by diag(a) then by C' equals one smoothing by diag(a) + C'."""
    rho = corr * b_t * b_f
    k1 = sampled_kernel(a_t, a_f, 0.0, eps=1e-16)
    k2 = sampled_kernel(b_t, b_f, rho, eps=1e-16)
    k12 = sampled_kernel(math.hypot(a_t, b_t), math.hypot(a_f, b_f), rho, eps=1e-16)
    c = convolve(k1, k2)
    pt = (c.shape[0] - k12.shape[0]) // 2
    pf = (c.shape[1] - k12.shape[1]) // 2
    if pt < 0 or pf < 0:
        c = np.pad(c, ((max(-pt, 0),) * 2, (max(-pf, 0),) * 2))
        pt, pf = max(pt, 0), max(pf, 0)
    c = c[pt:pt + k12.shape[0], pf:pf + k12.shape[1]]
    assert np.max(np.abs(c - k12)) <= 1e-6 * np.max(k12)
