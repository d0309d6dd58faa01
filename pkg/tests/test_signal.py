import math
import wave

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import frozen as FZ
import oracles as O
from ktfr import Signal, SignalSpec, analytic, gaussian_window, load_wav, parse_spec, synth
from ktfr.signal import WavFormatError, random_analytic, save_wav, shift


def _write_wav(path, data, rate, channels=1, width=2):
    with wave.open(str(path), "wb") as fh:
        fh.setnchannels(channels)
        fh.setsampwidth(width)
        fh.setframerate(rate)
        fh.writeframes(np.asarray(data).tobytes())


# ------------------------------------------------------------------- WAV --

def test_wav_silence(tmp_path):
    p = tmp_path / "silence.wav"
    _write_wav(p, np.zeros(200_000, dtype="<i2"), 200_000)
    x = load_wav(p)
    assert x.n == 200_000
    assert x.sample_rate_hz == 200_000
    assert not np.any(x.samples)


def test_wav_scaling(tmp_path):
    p = tmp_path / "peak.wav"
    d = np.zeros(16, dtype="<i2")
    d[5] = 32767
    _write_wav(p, d, 8000)
    assert load_wav(p).samples[5].real == pytest.approx(32767 / 32768, abs=0)
    assert load_wav(p).samples[5].real == pytest.approx(0.99997, abs=1e-5)


def test_wav_stereo_rejected(tmp_path):
    p = tmp_path / "stereo.wav"
    _write_wav(p, np.zeros(32, dtype="<i2"), 8000, channels=2)
    with pytest.raises(WavFormatError, match="unsupported channel count"):
        load_wav(p)


def test_wav_8bit_rejected(tmp_path):
    p = tmp_path / "u8.wav"
    _write_wav(p, np.full(32, 128, dtype=np.uint8), 8000, width=1)
    with pytest.raises(WavFormatError, match="sample width"):
        load_wav(p)


def test_wav_truncated_header(tmp_path):
    p = tmp_path / "cut.wav"
    _write_wav(p, np.zeros(32, dtype="<i2"), 8000)
    p.write_bytes(p.read_bytes()[:20])
    with pytest.raises(WavFormatError, match="cannot parse"):
        load_wav(p)


def test_wav_round_trip(tmp_path):
    p = tmp_path / "rt.wav"
    v = np.arange(-50, 50, dtype=np.int64) * 300
    x = Signal(v / 32768.0, 16000.0)
    save_wav(p, x)
    y = load_wav(p)
    assert np.array_equal(y.samples, x.samples)
    assert y.sample_rate_hz == 16000.0


# ----------------------------------------------------------------- synth --

def test_impulse():
    x = synth(SignalSpec("impulse", 8, params={"n0": 4}))
    assert np.array_equal(x.samples, [0, 0, 0, 0, 1, 0, 0, 0])


def test_tone_quarter_rate():
    x = synth(SignalSpec("tone", 4, params={"omega": math.pi / 2}))
    assert np.allclose(x.samples, [1, 1j, -1, -1j], atol=1e-15)


def test_noise_deterministic():
    a = synth(parse_spec("noise:seed=7", 64))
    b = synth(parse_spec("noise:seed=7", 64))
    assert np.array_equal(a.samples, b.samples)
    assert not np.array_equal(a.samples, synth(parse_spec("noise:seed=8", 64)).samples)


def test_frequency_out_of_range():
    with pytest.raises(ValueError, match="outside"):
        SignalSpec("tone", 8, params={"omega": 4.0})
    with pytest.raises(ValueError, match="outside"):
        synth(parse_spec("chirp:0.1pi,1.5pi", 16))


def test_parse_spec_forms():
    assert parse_spec("tone:0.5pi", 8).params["omega"] == pytest.approx(math.pi / 2)
    assert parse_spec("impulse:n0=3", 8).params["n0"] == 3
    s = parse_spec("sum:tone:0.2pi+tone:0.6pi", 32)
    assert s.kind == "sum" and len(s.components) == 2
    assert parse_spec("pulse:center=10,spread=2,omega=0.3pi", 32).params["spread"] == 2.0
    with pytest.raises(ValueError, match="unknown signal kind"):
        parse_spec("square:1", 8)


def test_signal_rejects_bad_input():
    with pytest.raises(ValueError):
        Signal(np.array([1.0]))
    with pytest.raises(ValueError, match="non-finite"):
        Signal(np.array([1.0, np.nan]))
    with pytest.raises(ValueError):
        Signal(np.zeros((2, 2)))


@settings(max_examples=30, deadline=None)
@given(kind=st.sampled_from(["tone", "chirp", "noise", "pulse"]),
       n=st.integers(4, 200), seed=st.integers(0, 10_000))
def test_synth_bitwise_deterministic(kind, n, seed):
    text = {"tone": "tone:0.3pi", "chirp": "chirp:0.1pi,0.7pi",
            "noise": f"noise:seed={seed}", "pulse": "pulse:spread=3,omega=0.2pi"}[kind]
    a = synth(parse_spec(text, n)).samples
    b = synth(parse_spec(text, n)).samples
    assert a.tobytes() == b.tobytes()


def test_shift_zero_fills():
    x = Signal(np.arange(1, 6, dtype=float))
    assert np.array_equal(shift(x, 2).samples, [0, 0, 1, 2, 3])
    assert np.array_equal(shift(x, -2).samples, [3, 4, 5, 0, 0])


# -------------------------------------------------------------- analytic --

def test_analytic_of_cosine_has_no_negative_frequencies():
    n, k0 = 64, 5
    w0 = 2 * math.pi * k0 / n
    z = analytic(Signal(np.cos(w0 * np.arange(n)))).samples
    spec = np.fft.fft(z)
    assert np.max(np.abs(spec[n // 2 + 1:])) <= 1e-9 * np.max(np.abs(spec))
    assert np.allclose(z, np.exp(1j * w0 * np.arange(n)), atol=1e-12)


def test_analytic_zero_and_complex():
    assert not np.any(analytic(Signal(np.zeros(16))).samples)
    with pytest.raises(ValueError, match="already complex"):
        analytic(Signal(np.ones(8) * 1j))


@settings(max_examples=25, deadline=None)
@given(n=st.integers(8, 128), seed=st.integers(0, 10_000))
def test_analytic_spectrum_doubling(n, seed):
    x = np.random.default_rng(seed).standard_normal(n)
    sx = np.fft.fft(x)
    sz = np.fft.fft(analytic(Signal(x)).samples)
    k = np.arange(n // 2 + 1)
    gain = np.where((k == 0) | (2 * k == n), 1.0, 2.0)
    assert np.allclose(sz[k], gain * sx[k], rtol=0, atol=1e-9 * np.max(np.abs(sx)))


def test_random_analytic_band():
    x = random_analytic(128, 0, band=(0.25, 0.75))
    spec = np.abs(np.fft.fft(x.samples))
    frac = 2 * np.arange(128) / 128
    outside = (frac <= 0.25) | (frac >= 0.75)
    assert np.max(spec[outside]) < 1e-10 * spec.max()


# ---------------------------------------------------------------- window --

def test_window_single_tap():
    w = gaussian_window(0.1, 0.5, 1.0)
    assert w.taps.size == 1 and w.taps[0] == 1.0


def test_window_tap_count_matches_oracle():
    w = gaussian_window(1e-3, 0.01, 1000.0)
    assert w.taps.size == FZ.TAPS_1MS_1KHZ_001
    assert w.taps.size == O.tap_count(1e-3, 1000.0, 0.01)


@pytest.mark.parametrize("sigma", [2e-3, 5e-3, 1.3e-2])
def test_window_tap_count_oracle_sweep(sigma):
    assert gaussian_window(sigma, 0.01, 1000.0).taps.size == O.tap_count(sigma, 1000.0, 0.01)


@pytest.mark.parametrize("sigma", [3e-3, 7e-3, 2e-2])
def test_window_doubling(sigma):
    a = gaussian_window(sigma, 1e-3, 1000.0).taps.size
    b = gaussian_window(2 * sigma, 1e-3, 1000.0).taps.size
    assert abs((b - 1) - 2 * (a - 1)) <= 2


@settings(max_examples=40, deadline=None)
@given(sigma=st.floats(1e-4, 5e-2), eps=st.floats(1e-8, 0.5))
def test_window_symmetric(sigma, eps):
    t = gaussian_window(sigma, eps, 1000.0).taps
    assert t.size % 2 == 1
    assert np.array_equal(t, t[::-1])
    assert t[t.size // 2] == 1.0


def test_window_tolerance_too_large():
    with pytest.raises(ValueError, match="tolerance too large"):
        gaussian_window(1e-3, 1.0, 1000.0)
