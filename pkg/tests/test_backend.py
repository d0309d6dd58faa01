import os
import subprocess
import sys

import numpy as np
import pytest

from ktfr import Preset, default_base, k_fast, preset_params, smoothed_pwvd
from ktfr import _backend, _kernels_py
from ktfr.signal import random_analytic

compiled = pytest.mark.skipif(not _backend.compiled_available(),
                              reason="compiled backend not built")


def _cells_args(seed, n_cells=200):
    rng = np.random.default_rng(seed)
    values = rng.standard_normal((40, 32))
    mu_t = rng.uniform(-5, 45, n_cells)
    mu_f = rng.uniform(-0.5, 3.5, n_cells)
    ptt, pff = rng.uniform(0.05, 1.0, n_cells), rng.uniform(5.0, 50.0, n_cells)
    ptf = rng.uniform(-0.9, 0.9, n_cells) * np.sqrt(ptt * pff)
    ht, hf = rng.uniform(0, 8, n_cells), rng.uniform(0, 0.8, n_cells)
    return values, -1.0, 1.0, 0.0, np.pi / 32, mu_t, mu_f, ptt, ptf, pff, ht, hf


@compiled
@pytest.mark.parametrize("wrap", [False, True])
@pytest.mark.parametrize("seed", range(3))
def test_gaussian_cells_parity(seed, wrap):
    args = _cells_args(seed)
    s_py, m_py = _kernels_py.gaussian_cells(*args, int(wrap), 1)
    s_c, m_c = _backend._compiled.gaussian_cells(*args, int(wrap), 2)
    assert np.allclose(s_c, s_py, rtol=1e-12, atol=1e-12)
    assert np.allclose(m_c, m_py, rtol=1e-12, atol=1e-12)


@compiled
@pytest.mark.parametrize("seed", range(3))
def test_spectral_autocorr_parity(seed):
    rng = np.random.default_rng(seed)
    s = rng.standard_normal((17, 64)) + 1j * rng.standard_normal((17, 64))
    w = rng.uniform(size=6)
    kidx = np.arange(0, 64, 2, dtype=np.int64)
    a = _kernels_py.spectral_autocorr(s, w, kidx)
    b = _backend._compiled.spectral_autocorr(s, w, kidx, 2)
    assert np.allclose(a, b, rtol=1e-12, atol=1e-12)


@compiled
def test_end_to_end_parity():
    x = random_analytic(64, 4)
    g = preset_params(Preset("scalogram"), 64, 64)
    base = default_base(g)
    try:
        _backend.use("compiled")
        a = k_fast(x, g, base).values
        pa = smoothed_pwvd(x, base).values
        _backend.use("python")
        b = k_fast(x, g, base).values
        pb = smoothed_pwvd(x, base).values
    finally:
        _backend.use("auto")
    scale = np.abs(a).max()
    assert np.max(np.abs(a - b)) <= 1e-12 * scale
    assert np.max(np.abs(pa - pb)) <= 1e-12 * np.abs(pa).max()


def test_empty_boxes_give_zero():
    args = list(_cells_args(0, 4))
    args[10] = np.full(4, -1.0)
    s, m = _kernels_py.gaussian_cells(*args)
    assert not np.any(s) and not np.any(m)


def test_selection():
    try:
        assert _backend.use("python") == "python" and _backend.name() == "python"
        with pytest.raises(ValueError, match="unknown backend"):
            _backend.use("fortran")
    finally:
        _backend.use("auto")
    assert _backend.name() == ("compiled" if _backend.compiled_available() else "python")


def test_environment_forces_fallback():
    env = dict(os.environ, KTFR_BACKEND="python")
    r = subprocess.run([sys.executable, "-c", "from ktfr import _backend; print(_backend.name())"],
                       capture_output=True, text=True, env=env)
    assert r.stdout.strip() == "python"


def test_thread_env(monkeypatch):
    monkeypatch.setenv("KTFR_THREADS", "3")
    assert _backend.threads() == 3
    monkeypatch.setenv("KTFR_THREADS", "junk")
    assert _backend.threads() == (os.cpu_count() or 1)
