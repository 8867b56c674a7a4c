"""Optical elements and cascade propagation.

One stage is a phase modulator followed by a quadratic-phase all-pass
dispersive element.  By default the last stage has no dispersive element, so
the cascade reads ``phi_1, H, phi_2, H, ..., H, phi_N``; set
``include_trailing_dispersion`` to append the final ``H``.

Frequencies are in units of the symbol rate f_s, times in symbol periods
T_s, and the group-delay dispersion in units of T_s**2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import fft as sfft
from scipy.constants import c as SPEED_OF_LIGHT

from ._kernels import kernels
from .errors import DimensionError
from .signal import ComplexWaveform

C_NM_PER_PS = SPEED_OF_LIGHT * 1e9 / 1e12


def symbol_period_ps(symbol_rate_gbd: float) -> float:
    return 1000.0 / symbol_rate_gbd


def physical_dispersion(dispersion_norm: float, symbol_rate_gbd: float) -> float:
    """Per-stage dispersion in ps/nm from the T_s**2-normalised value."""
    if symbol_rate_gbd <= 0:
        raise ValueError("symbol_rate must be positive")
    return dispersion_norm * symbol_period_ps(symbol_rate_gbd) ** 2


def dispersion_to_gdd(
    dispersion_norm: float, symbol_rate: float = 200.0, wavelength: float = 1550.0
) -> float:
    """Normalised group-delay dispersion (units of T_s**2) of one element.

    ``dispersion_norm`` is D[ps/nm] / T_s[ps]**2, ``symbol_rate`` in GBd and
    ``wavelength`` in nm.  Anomalous dispersion (D > 0) maps to a negative
    quadratic spectral phase coefficient.
    """
    if wavelength <= 0:
        raise ValueError("wavelength must be positive")
    d_ps_per_nm = physical_dispersion(dispersion_norm, symbol_rate)
    gdd_ps2 = -d_ps_per_nm * wavelength**2 / (2.0 * np.pi * C_NM_PER_PS)
    return gdd_ps2 / symbol_period_ps(symbol_rate) ** 2


@dataclass(frozen=True)
class StageConfig:
    dispersion_norm: float = 0.3
    pm_bandwidth: float = 0.55
    include_trailing_dispersion: bool = False
    wavelength_nm: float = 1550.0
    symbol_rate_gbd: float = 200.0

    def __post_init__(self):
        if self.dispersion_norm < 0:
            raise ValueError("dispersion_norm must be >= 0")
        if not self.pm_bandwidth > 0:
            raise ValueError("pm_bandwidth must be > 0")

    @property
    def gdd(self) -> float:
        return dispersion_to_gdd(self.dispersion_norm, self.symbol_rate_gbd, self.wavelength_nm)

    def check_grid(self, sample_rate: float) -> None:
        if self.pm_bandwidth > sample_rate / 2:
            raise ValueError(
                f"pm_bandwidth {self.pm_bandwidth} exceeds grid Nyquist {sample_rate / 2}"
            )


@dataclass(frozen=True)
class PhaseProfileSet:
    """N real phase drives (radians) on the simulation grid, shape (N, M)."""

    profiles: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.profiles)
        if np.iscomplexobj(p):
            if np.any(p.imag != 0):
                raise ValueError("phase profiles must be real-valued")
            p = p.real
        p = np.atleast_2d(np.asarray(p, dtype=np.float64))
        if p.ndim != 2:
            raise DimensionError("profiles must be a 2-D (stage, sample) array")
        object.__setattr__(self, "profiles", p)

    @property
    def stage_count(self) -> int:
        return self.profiles.shape[0]

    @property
    def length(self) -> int:
        return self.profiles.shape[1]

    @classmethod
    def zeros(cls, stage_count: int, length: int) -> "PhaseProfileSet":
        return cls(np.zeros((stage_count, length)))


@dataclass(frozen=True)
class DispersiveElement:
    gdd_norm: float

    def transfer(self, n: int, sample_rate: float) -> np.ndarray:
        """H(omega) on the length-``n`` DFT grid."""
        return _dispersion_transfer(self.gdd_norm, n, float(sample_rate))


@lru_cache(maxsize=64)
def _dispersion_transfer(gdd, n, sample_rate):
    omega = 2.0 * np.pi * np.fft.fftfreq(n, d=1.0 / sample_rate)
    h = np.exp(1j * (gdd / 2.0) * omega**2)
    h.setflags(write=False)
    return h


@lru_cache(maxsize=64)
def lowpass_mask(n: int, bandwidth: float, sample_rate: float, real: bool = False) -> np.ndarray:
    """Brick-wall mask keeping |f| <= bandwidth; rfft layout when ``real``."""
    if real:
        f = np.fft.rfftfreq(n, d=1.0 / sample_rate)
    else:
        f = np.abs(np.fft.fftfreq(n, d=1.0 / sample_rate))
    mask = (f <= bandwidth * (1 + 1e-12)).astype(np.float64)
    mask.setflags(write=False)
    return mask


def bandlimit_phase(profile, pm_bandwidth: float, sample_rate: float) -> np.ndarray:
    """Ideal lowpass of a real phase drive: zero every bin with |f| > pm_bandwidth."""
    if not 0 < pm_bandwidth <= sample_rate / 2:
        raise ValueError("need 0 < pm_bandwidth <= sample_rate / 2")
    profile = np.asarray(profile, dtype=np.float64)
    mask = lowpass_mask(profile.shape[-1], pm_bandwidth, float(sample_rate), real=True)
    return sfft.irfft(sfft.rfft(profile, axis=-1) * mask, n=profile.shape[-1], axis=-1)


def lowpass_complex(x: np.ndarray, bandwidth: float, sample_rate: float) -> np.ndarray:
    mask = lowpass_mask(x.shape[-1], bandwidth, float(sample_rate))
    return sfft.ifft(sfft.fft(x) * mask)


def apply_phase_modulator(wave: ComplexWaveform, profile) -> ComplexWaveform:
    profile = np.asarray(profile, dtype=np.float64)
    if profile.shape != wave.samples.shape:
        raise DimensionError(f"profile length {profile.size} != waveform length {len(wave)}")
    return ComplexWaveform(kernels.modulate(wave.samples, profile, 1.0), wave.sample_rate)


def apply_dispersion(wave: ComplexWaveform, element: DispersiveElement) -> ComplexWaveform:
    if len(wave) < 2:
        raise DimensionError("dispersion needs at least two samples")
    h = element.transfer(len(wave), wave.sample_rate)
    return ComplexWaveform(sfft.ifft(sfft.fft(wave.samples) * h), wave.sample_rate)


@dataclass
class Cascade:
    """Array-level cascade used by the propagation functions and the solver."""

    stage_count: int
    length: int
    sample_rate: float
    gdd: float
    trailing: bool = False
    _h: np.ndarray = field(init=False, repr=False)
    _hinv: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.stage_count < 1:
            raise ValueError("stage_count must be >= 1")
        self._h = _dispersion_transfer(self.gdd, self.length, float(self.sample_rate))
        self._hinv = np.conj(self._h)

    @classmethod
    def from_stages(cls, stages: StageConfig, stage_count: int, length: int, sample_rate: float):
        return cls(stage_count, length, sample_rate, stages.gdd, stages.include_trailing_dispersion)

    def has_dispersion_after(self, n: int) -> bool:
        """Whether stage ``n`` (0-based) ends with a dispersive element."""
        return n < self.stage_count - 1 or self.trailing

    def disperse(self, x):
        if self.gdd == 0.0:
            return x.copy()
        return sfft.ifft(sfft.fft(x) * self._h)

    def undisperse(self, x):
        if self.gdd == 0.0:
            return x.copy()
        return sfft.ifft(sfft.fft(x) * self._hinv)

    def forward(self, x0, phases):
        """Fields entering each modulator, plus the output: N + 1 arrays."""
        out = []
        x = np.asarray(x0, dtype=np.complex128)
        for n in range(self.stage_count):
            out.append(x)
            x = kernels.modulate(x, phases[n], 1.0)
            if self.has_dispersion_after(n):
                x = self.disperse(x)
        out.append(x)
        return out

    def output(self, x0, phases):
        return self.forward(x0, phases)[-1]

    def backward(self, target, phases):
        """Target carried back to the output side of each modulator, stage order."""
        return self.backward_phasors(target, [kernels.phasor(p) for p in phases])

    def backward_phasors(self, target, phasors):
        """As :meth:`backward`, with precomputed exp(i*phi_n) rows."""
        y = np.asarray(target, dtype=np.complex128)
        res = [None] * self.stage_count
        for n in range(self.stage_count - 1, -1, -1):
            if self.has_dispersion_after(n):
                y = self.undisperse(y)
            res[n] = y
            if n:
                y = y * np.conj(phasors[n])
        return res

    def invert(self, output, phases):
        """Undo the whole cascade: the input field that produces ``output``."""
        y = self.backward(output, phases)[0]
        return kernels.modulate(y, np.ascontiguousarray(phases[0]), -1.0)


def _phase_rows(phases: PhaseProfileSet, n: int):
    if phases.length != n:
        raise DimensionError(f"phase profiles have length {phases.length}, grid has {n}")
    return phases.profiles


def propagate_forward(
    cw_amplitude: float,
    phases: PhaseProfileSet,
    stages: StageConfig,
    sample_rate: float,
) -> list[ComplexWaveform]:
    """F_1..F_N (fields entering each modulator) followed by the cascade output."""
    n = phases.length
    cas = Cascade.from_stages(stages, phases.stage_count, n, sample_rate)
    x0 = np.full(n, cw_amplitude, dtype=np.complex128)
    return [ComplexWaveform(x, sample_rate) for x in cas.forward(x0, phases.profiles)]


def propagate_backward(
    target: ComplexWaveform, phases: PhaseProfileSet, stages: StageConfig
) -> list[ComplexWaveform]:
    """B_1..B_N: ``target`` carried back to the output side of each modulator.

    B_n has passed through the inverses of every element after modulator n
    (conjugate dispersion, negated phases) but not through modulator n
    itself.  For phases that realize ``target`` exactly,
    ``F_n * exp(i*phi_n) == B_n``.
    """
    rows = _phase_rows(phases, len(target))
    cas = Cascade.from_stages(stages, phases.stage_count, len(target), target.sample_rate)
    return [ComplexWaveform(b, target.sample_rate) for b in cas.backward(target.samples, rows)]
