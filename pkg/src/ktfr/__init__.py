"""Gaussian-kernel smoothed Wigner-Ville transforms (the K-transform).

Exact quadratic evaluation, a fast STFT-based path, classical presets,
interference and stability diagnostics, and a small kernel learner.
"""
from .diagnostics import interference_report, lipschitz_bound, logon_area, logon_summary
from .kernels import KernelGrid, KernelParams, gaussian_kernel, read_grid_csv, write_grid_csv
from .ktransform import default_base, k_equivariant, k_exact, k_fast
from .presets import PRESETS, Preset, preset_params, preset_table
from .signal import Signal, SignalSpec, analytic, gaussian_window, load_wav, parse_spec, synth
from .stft import (BasePreconditionError, BaseSmoothing, ResidualNotPSDError,
                   residual_smooth_sample, smoothed_pwvd, spectrogram, stft_gabor)
from .tfr import ComplexTFR, TFRMatrix, read_csv, read_pgm, write_csv, write_pgm
from .wvd import cohen_smooth, wvd_diagnostics, wvd_direct

__version__ = "0.1.0"
