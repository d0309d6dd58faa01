"""Kernel backend selection.

The compiled extension ``ktfr._core`` is used when importable; set
``KTFR_BACKEND=python`` to force the numpy fallback.  ``KTFR_THREADS`` caps
the thread count handed to the compiled loops and to scipy's FFT.
"""
import os

from . import _kernels_py

try:  # pragma: no cover - depends on the build
    from . import _core as _compiled
except ImportError:  # pragma: no cover
    _compiled = None

_name = "python"
_impl = _kernels_py


def _select(name=None):
    global _name, _impl
    name = (name or os.environ.get("KTFR_BACKEND", "")).strip().lower() or "auto"
    if name not in ("auto", "compiled", "python"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "python" or (name == "auto" and _compiled is None):
        _name, _impl = "python", _kernels_py
    elif _compiled is None:
        raise ImportError("compiled backend requested but ktfr._core is not built")
    else:
        _name, _impl = "compiled", _compiled
    return _name


def use(name):
    """Switch backend at runtime (``"compiled"``, ``"python"`` or ``"auto"``)."""
    return _select(name)


def name():
    return _name


def compiled_available():
    return _compiled is not None


def threads():
    try:
        n = int(os.environ.get("KTFR_THREADS", "0"))
    except ValueError:
        n = 0
    return n if n > 0 else (os.cpu_count() or 1)


def gaussian_cells(values, t0, dt, f0, df, mu_t, mu_f, ptt, ptf, pff, ht, hf, wrap_f=False):
    return _impl.gaussian_cells(values, t0, dt, f0, df, mu_t, mu_f, ptt, ptf, pff, ht, hf,
                                int(wrap_f), threads())


def spectral_autocorr(stft, weights, kidx):
    return _impl.spectral_autocorr(stft, weights, kidx, threads())


_select()
