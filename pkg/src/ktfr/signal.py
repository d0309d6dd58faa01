"""Signals: containers, WAV ingestion, oracle test signals, analytic conversion
and truncated Gaussian windows."""
from __future__ import annotations

import math
import wave
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import hilbert
from scipy.signal.windows import tukey

__all__ = [
    "Signal", "SignalSpec", "GaussianWindow", "WavFormatError",
    "load_wav", "synth", "parse_spec", "analytic", "gaussian_window",
    "gaussian_taps", "window_length", "random_analytic", "shift",
]


class WavFormatError(ValueError):
    """Raised for WAV files outside the supported 16-bit PCM mono subset."""


@dataclass(frozen=True)
class Signal:
    samples: np.ndarray
    sample_rate_hz: float = 1.0

    def __post_init__(self):
        x = np.asarray(self.samples, dtype=np.complex128)
        if x.ndim != 1:
            raise ValueError("samples must be one-dimensional")
        if x.size < 2:
            raise ValueError(f"signal needs at least 2 samples, got {x.size}")
        if not np.all(np.isfinite(x)):
            raise ValueError("signal contains non-finite samples")
        if not self.sample_rate_hz > 0:
            raise ValueError("sample_rate_hz must be positive")
        x.setflags(write=False)
        object.__setattr__(self, "samples", x)

    def __len__(self):
        return self.samples.size

    @property
    def n(self) -> int:
        return self.samples.size

    @property
    def is_real(self) -> bool:
        return not np.any(self.samples.imag)

    @property
    def energy(self) -> float:
        return float(np.sum(np.abs(self.samples) ** 2))

    def scaled(self, alpha: complex) -> "Signal":
        return Signal(self.samples * alpha, self.sample_rate_hz)


# --------------------------------------------------------------------- WAV --

def load_wav(path) -> Signal:
    """Read a 16-bit PCM mono WAV file; int16 values are divided by 32768."""
    try:
        with wave.open(str(path), "rb") as fh:
            channels = fh.getnchannels()
            width = fh.getsampwidth()
            rate = fh.getframerate()
            if fh.getcomptype() != "NONE":
                raise WavFormatError(f"unsupported compression {fh.getcomptype()!r}")
            if channels != 1:
                raise WavFormatError(f"unsupported channel count: {channels}")
            if width != 2:
                raise WavFormatError(f"unsupported sample width: {8 * width} bits")
            raw = fh.readframes(fh.getnframes())
    except wave.Error as exc:
        raise WavFormatError(f"cannot parse WAV header: {exc}") from exc
    except EOFError as exc:
        raise WavFormatError("cannot parse WAV header: truncated file") from exc
    data = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
    if data.size < 2:
        raise WavFormatError("WAV file holds fewer than 2 samples")
    return Signal(data, float(rate))


def save_wav(path, x: Signal) -> None:
    """Write the real part of ``x`` as 16-bit PCM mono (clipped to [-1, 1))."""
    v = np.clip(np.round(x.samples.real * 32768.0), -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as fh:
        fh.setnchannels(1)
        fh.setsampwidth(2)
        fh.setframerate(int(round(x.sample_rate_hz)))
        fh.writeframes(v.tobytes())


# ---------------------------------------------------------- oracle signals --

_KINDS = ("impulse", "tone", "linear_chirp", "gaussian_pulse", "white_noise", "sum")


@dataclass(frozen=True)
class SignalSpec:
    """Recipe for a deterministic test signal.

    ``params`` by kind: impulse ``n0``; tone ``omega``; linear_chirp
    ``omega_start``, ``omega_end``; gaussian_pulse ``center``, ``spread`` and
    optional carrier ``omega``; white_noise ``seed``.  Frequencies are in
    rad/sample and must lie in [0, pi].
    """

    kind: str
    length: int
    sample_rate: float = 1.0
    amplitude: float = 1.0
    params: dict = field(default_factory=dict)
    components: tuple = ()

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown signal kind {self.kind!r}")
        if self.length < 2:
            raise ValueError("length must be >= 2")
        for key in ("omega", "omega_start", "omega_end"):
            if key in self.params:
                w = float(self.params[key])
                if not 0.0 <= w <= math.pi:
                    raise ValueError(f"{key}={w} outside [0, pi]")
        if self.kind == "impulse":
            n0 = int(self.params.get("n0", 0))
            if not 0 <= n0 < self.length:
                raise ValueError(f"impulse position {n0} outside [0, {self.length})")
        if self.kind == "sum" and not self.components:
            raise ValueError("sum spec needs at least one component")


def synth(spec: SignalSpec) -> Signal:
    n = np.arange(spec.length, dtype=np.float64)
    p = spec.params
    a = spec.amplitude
    if spec.kind == "impulse":
        x = np.zeros(spec.length, dtype=np.complex128)
        x[int(p.get("n0", 0))] = a
    elif spec.kind == "tone":
        x = a * np.exp(1j * float(p["omega"]) * n)
    elif spec.kind == "linear_chirp":
        w0, w1 = float(p["omega_start"]), float(p["omega_end"])
        rate = (w1 - w0) / max(spec.length - 1, 1)
        x = a * np.exp(1j * (w0 * n + 0.5 * rate * n * n + float(p.get("phase", 0.0))))
    elif spec.kind == "gaussian_pulse":
        c = float(p.get("center", spec.length / 2))
        s = float(p.get("spread", spec.length / 8))
        x = a * np.exp(-0.5 * ((n - c) / s) ** 2) * np.exp(1j * float(p.get("omega", 0.0)) * n)
    elif spec.kind == "white_noise":
        rng = np.random.default_rng(int(p.get("seed", 0)))
        x = a * rng.standard_normal(spec.length)
    else:
        x = np.zeros(spec.length, dtype=np.complex128)
        for comp in spec.components:
            if comp.length != spec.length:
                raise ValueError("sum components must share the parent length")
            x = x + synth(comp).samples
        x = a * x
    return Signal(x, spec.sample_rate)


def _parse_freq(text: str) -> float:
    t = text.strip().lower()
    if t.endswith("pi"):
        head = t[:-2].rstrip("*")
        return (float(head) if head else 1.0) * math.pi
    return float(t)


def parse_spec(text: str, length: int, sample_rate: float = 1.0) -> SignalSpec:
    """Parse the compact CLI signal syntax.

    Examples: ``tone:0.5pi``, ``noise:seed=7``, ``impulse:n0=4``,
    ``chirp:0.1pi,0.8pi``, ``pulse:center=64,spread=8,omega=0.3pi``,
    ``sum:tone:0.2pi+tone:0.6pi``.  An ``amp=`` key scales any kind.
    """
    kind, _, rest = text.strip().partition(":")
    kind = kind.lower()
    if kind == "sum":
        comps = tuple(parse_spec(part, length, sample_rate) for part in rest.split("+"))
        return SignalSpec("sum", length, sample_rate, 1.0, {}, comps)
    fields = [f for f in rest.split(",") if f.strip()]
    kv, pos = {}, []
    for f in fields:
        if "=" in f:
            k, v = f.split("=", 1)
            kv[k.strip().lower()] = v.strip()
        else:
            pos.append(f.strip())
    amp = float(kv.pop("amp", 1.0))
    if kind == "tone":
        params = {"omega": _parse_freq(pos[0] if pos else kv["omega"])}
        return SignalSpec("tone", length, sample_rate, amp, params)
    if kind in ("chirp", "linear_chirp"):
        w0 = _parse_freq(pos[0] if pos else kv["start"])
        w1 = _parse_freq(pos[1] if len(pos) > 1 else kv["end"])
        return SignalSpec("linear_chirp", length, sample_rate, amp,
                          {"omega_start": w0, "omega_end": w1})
    if kind == "impulse":
        return SignalSpec("impulse", length, sample_rate, amp,
                          {"n0": int(pos[0] if pos else kv.get("n0", 0))})
    if kind in ("noise", "white_noise"):
        return SignalSpec("white_noise", length, sample_rate, amp,
                          {"seed": int(pos[0] if pos else kv.get("seed", 0))})
    if kind in ("pulse", "gaussian_pulse"):
        params = {"center": float(kv.get("center", length / 2)),
                  "spread": float(kv.get("spread", length / 8))}
        if "omega" in kv:
            params["omega"] = _parse_freq(kv["omega"])
        return SignalSpec("gaussian_pulse", length, sample_rate, amp, params)
    raise ValueError(f"unknown signal kind {kind!r}")


def random_analytic(n: int, seed: int, band=(0.0, 1.0), sample_rate: float = 1.0,
                    taper: float = 0.0) -> Signal:
    """Random analytic signal with complex Gaussian spectrum on bins whose
    frequency lies strictly inside ``band`` (fractions of pi).

    DC and Nyquist bins are always empty so the even/odd sample energies
    match exactly (the discrete WVD norm identity relies on it).  ``taper``
    is the Tukey fraction of a smooth onset/offset envelope; it removes the
    record-edge step that discrete smoothing schemes disagree on.
    """
    rng = np.random.default_rng(seed)
    k = np.arange(n)
    w = 2.0 * k / n  # fraction of pi
    keep = (k > 0) & (2 * k < n) & (w > band[0]) & (w < band[1])
    spec = np.zeros(n, dtype=np.complex128)
    m = int(keep.sum())
    spec[keep] = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    x = np.fft.ifft(spec) * math.sqrt(n)
    if taper > 0:
        x = x * tukey(n, taper)
    return Signal(x, sample_rate)


def shift(x: Signal, s: int) -> Signal:
    """Delay by ``s`` samples (advance if negative), zero-filling."""
    out = np.zeros_like(x.samples)
    if s >= 0:
        out[s:] = x.samples[: x.n - s]
    else:
        out[:s] = x.samples[-s:]
    return Signal(out, x.sample_rate_hz)


# ----------------------------------------------------------------- analytic --

def analytic(x: Signal) -> Signal:
    """Analytic signal of a real input (negative-frequency bins zeroed)."""
    if not x.is_real:
        raise ValueError("already complex: analytic() expects a real-valued signal")
    z = hilbert(x.samples.real)
    return Signal(z, x.sample_rate_hz)


# ------------------------------------------------------------------ windows --

@dataclass(frozen=True)
class GaussianWindow:
    sigma: float
    taps: np.ndarray
    truncation_eps: float

    @property
    def half(self) -> int:
        return (self.taps.size - 1) // 2


def window_length(sigma: float, eps: float, fs: float) -> float:
    """Continuous window length in samples: ``-g^-1(eps) * 2 * fs`` for the
    unit-peak Gaussian of standard deviation ``sigma`` seconds."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    if not 0.0 < eps:
        raise ValueError("eps must be positive")
    if eps >= 1.0:
        raise ValueError("tolerance too large: eps must be below the unit peak")
    return 2.0 * fs * sigma * math.sqrt(2.0 * math.log(1.0 / eps))


def gaussian_taps(std_samples: float, eps: float) -> np.ndarray:
    """Unit-peak Gaussian taps with spread in samples, truncated where the
    tap value drops to ``eps``; always odd length."""
    span = window_length(std_samples, eps, 1.0)
    if span <= 1.0:
        return np.ones(1)
    half = math.ceil(span / 2.0 - 1e-12)
    u = np.arange(-half, half + 1, dtype=np.float64)
    return np.exp(-0.5 * (u / std_samples) ** 2)


def gaussian_window(sigma: float, eps: float, fs: float) -> GaussianWindow:
    if not 0.0 < eps < 1.0:
        raise ValueError("tolerance too large: eps must lie in (0, 1)")
    taps = gaussian_taps(sigma * fs, eps)
    taps.setflags(write=False)
    return GaussianWindow(sigma, taps, eps)
