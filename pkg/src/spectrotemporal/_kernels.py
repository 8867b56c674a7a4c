"""Elementwise hot loops of the cascade model.

Every kernel has a numba implementation and a pure-numpy twin with the same
signature.  The active backend is chosen once at import time:

    SPECTROTEMPORAL_BACKEND=numpy   force the numpy path
    SPECTROTEMPORAL_BACKEND=numba   require numba (ImportError if missing)

Unset, numba is used when importable.  Both backends are always importable
as ``numpy_kernels`` / ``numba_kernels`` so tests and benchmarks can compare
them directly.
"""

import math
import os
import types

import numpy as np

TWO_PI = 2.0 * math.pi


def _have_numba():
    try:
        import numba  # noqa: F401

        return True
    except ImportError:
        return False


HAVE_NUMBA = _have_numba()


# ---------------------------------------------------------------- numpy path


def _np_phasor(phi):
    return np.exp(1j * phi)


def _np_modulate(x, phi, sign):
    return x * np.exp((1j * sign) * phi)


def _np_overlap(f, b, phasor):
    return f * np.conj(b) * phasor


def _np_wrap_phase(phi):
    return np.mod(phi + math.pi, TWO_PI) - math.pi


def _np_quantize_midrise(phi, bits):
    levels = 2**bits
    step = TWO_PI / levels
    w = _np_wrap_phase(phi)
    idx = np.floor((w + math.pi) / step)
    idx = np.clip(idx, 0, levels - 1)
    return (idx + 0.5) * step - math.pi


def _np_mzm_iq_power(i_drive, q_drive, scale):
    ei = np.sin(scale * i_drive)
    eq = np.sin(scale * q_drive)
    # splitter and combiner each contribute 1/sqrt(2) in field
    return 0.25 * (ei * ei + eq * eq)


numpy_kernels = types.SimpleNamespace(
    name="numpy",
    phasor=_np_phasor,
    modulate=_np_modulate,
    overlap=_np_overlap,
    wrap_phase=_np_wrap_phase,
    quantize_midrise=_np_quantize_midrise,
    mzm_iq_power=_np_mzm_iq_power,
)


# ---------------------------------------------------------------- numba path

numba_kernels = None

if HAVE_NUMBA:
    from numba import njit

    @njit(cache=True)
    def _nb_phasor(phi):
        out = np.empty(phi.shape[0], dtype=np.complex128)
        for k in range(phi.shape[0]):
            out[k] = complex(math.cos(phi[k]), math.sin(phi[k]))
        return out

    @njit(cache=True)
    def _nb_modulate(x, phi, sign):
        out = np.empty_like(x)
        for k in range(x.shape[0]):
            a = sign * phi[k]
            out[k] = x[k] * complex(math.cos(a), math.sin(a))
        return out

    @njit(cache=True)
    def _nb_overlap(f, b, phasor):
        out = np.empty_like(f)
        for k in range(f.shape[0]):
            out[k] = f[k] * b[k].conjugate() * phasor[k]
        return out

    @njit(cache=True)
    def _nb_wrap_phase(phi):
        out = np.empty_like(phi)
        for k in range(phi.shape[0]):
            w = (phi[k] + math.pi) % TWO_PI
            out[k] = w - math.pi
        return out

    @njit(cache=True)
    def _nb_quantize_midrise(phi, bits):
        levels = 2**bits
        step = TWO_PI / levels
        out = np.empty_like(phi)
        for k in range(phi.shape[0]):
            w = (phi[k] + math.pi) % TWO_PI
            idx = math.floor(w / step)
            if idx < 0:
                idx = 0
            elif idx > levels - 1:
                idx = levels - 1
            out[k] = (idx + 0.5) * step - math.pi
        return out

    @njit(cache=True)
    def _nb_mzm_iq_power(i_drive, q_drive, scale):
        out = np.empty(i_drive.shape[0])
        for k in range(i_drive.shape[0]):
            ei = math.sin(scale * i_drive[k])
            eq = math.sin(scale * q_drive[k])
            out[k] = 0.25 * (ei * ei + eq * eq)
        return out

    numba_kernels = types.SimpleNamespace(
        name="numba",
        phasor=_nb_phasor,
        modulate=_nb_modulate,
        overlap=_nb_overlap,
        wrap_phase=_nb_wrap_phase,
        quantize_midrise=_nb_quantize_midrise,
        mzm_iq_power=_nb_mzm_iq_power,
    )


def select_backend(name=None):
    """Return the kernel namespace for ``name`` (or the env default)."""
    if name is None:
        name = os.environ.get("SPECTROTEMPORAL_BACKEND", "").strip().lower()
    if name == "numpy":
        return numpy_kernels
    if name == "numba":
        if numba_kernels is None:
            raise ImportError("SPECTROTEMPORAL_BACKEND=numba but numba is not installed")
        return numba_kernels
    if name:
        raise ValueError(f"unknown SPECTROTEMPORAL_BACKEND {name!r}")
    return numba_kernels if numba_kernels is not None else numpy_kernels


kernels = select_backend()
