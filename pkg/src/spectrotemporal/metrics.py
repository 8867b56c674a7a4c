"""Fidelity and noise figures: SDR, quantization, shot noise, IQ baseline."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT
from scipy.constants import h as PLANCK

from ._kernels import kernels
from .channel import Cascade, PhaseProfileSet, StageConfig
from .errors import UndefinedMetricError
from .signal import ComplexWaveform, PulseShape, SymbolBlock, matched_filter_and_sample, shape_rrc

SDR_CAP_DB = 150.0


@dataclass(frozen=True)
class SdrReport:
    sdr_db: float
    per_symbol_error: np.ndarray
    complex_gain: complex


def sdr_from_symbols(recovered: np.ndarray, reference: np.ndarray) -> SdrReport:
    """SDR of ``recovered`` against ``reference`` after a least-squares complex gain."""
    ref_energy = float(np.vdot(reference, reference).real)
    if not ref_energy > 0:
        raise UndefinedMetricError("reference symbols have zero energy")
    rec_energy = float(np.vdot(recovered, recovered).real)
    if rec_energy > 0:
        gain = complex(np.vdot(recovered, reference) / rec_energy)
    else:
        gain = 0j
    err = gain * recovered - reference
    err_energy = float(np.vdot(err, err).real)
    if err_energy <= ref_energy * 10 ** (-SDR_CAP_DB / 10):
        sdr = SDR_CAP_DB
    else:
        sdr = 10.0 * math.log10(ref_energy / err_energy)
    return SdrReport(sdr, err, gain)


def compute_sdr(output: ComplexWaveform, reference_block: SymbolBlock, shape: PulseShape) -> SdrReport:
    recovered = matched_filter_and_sample(output, shape)
    if recovered.size != len(reference_block):
        raise UndefinedMetricError(
            f"output holds {recovered.size} symbols, reference has {len(reference_block)}"
        )
    return sdr_from_symbols(recovered, reference_block.symbols)


def dispersive_efficiency_ratio(target: ComplexWaveform) -> float:
    """mean(|x|)**2 / mean(|x|**2): the single phase-only element efficiency limit."""
    mag = np.abs(target.samples)
    power = float(np.mean(mag**2))
    if power == 0:
        raise UndefinedMetricError("target waveform is identically zero")
    return float(np.mean(mag)) ** 2 / power


def quantize_phase(phases: PhaseProfileSet, bits: int) -> PhaseProfileSet:
    """Wrap to [-pi, pi) and apply a 2**bits-level mid-rise quantizer."""
    if bits < 1:
        raise ValueError("bits must be >= 1")
    rows = [kernels.quantize_midrise(np.ascontiguousarray(p), int(bits)) for p in phases.profiles]
    return PhaseProfileSet(np.array(rows))


def quantized_sinad(
    solution,
    bits: int,
    stages: StageConfig,
    reference_block: SymbolBlock,
    shape: PulseShape,
) -> float:
    """SINAD of the cascade driven by ``bits``-bit quantized copies of the solved phases."""
    q = quantize_phase(solution.phases, bits)
    n = q.length
    cas = Cascade.from_stages(stages, q.stage_count, n, float(shape.oversampling))
    out = cas.output(np.full(n, solution.cw_amplitude, dtype=np.complex128), q.profiles)
    return compute_sdr(ComplexWaveform(out, float(shape.oversampling)), reference_block, shape).sdr_db


@dataclass(frozen=True)
class NoiseBudget:
    laser_power_dbm: float = 0.0
    insertion_loss_db_per_stage: float = 2.0
    stage_count: int = 0
    symbol_rate_ghz: float = 200.0
    wavelength_nm: float = 1550.0
    quantum_efficiency: float = 1.0

    def __post_init__(self):
        if not self.symbol_rate_ghz > 0:
            raise ValueError("symbol_rate_ghz must be positive")
        if not 0 < self.quantum_efficiency <= 1:
            raise ValueError("quantum_efficiency must lie in (0, 1]")


def photons_per_symbol(budget: NoiseBudget, extra_modulation_loss_db: float = 0.0) -> float:
    p_out_dbm = (
        budget.laser_power_dbm
        - budget.stage_count * budget.insertion_loss_db_per_stage
        - extra_modulation_loss_db
    )
    p_watts = 1e-3 * 10 ** (p_out_dbm / 10)
    photon_energy = PLANCK * SPEED_OF_LIGHT / (budget.wavelength_nm * 1e-9)
    return budget.quantum_efficiency * p_watts / (photon_energy * budget.symbol_rate_ghz * 1e9)


def shot_noise_snr(budget: NoiseBudget, extra_modulation_loss_db: float = 0.0) -> float:
    """Shot-noise-limited SNR per symbol in dB (= detected photons per symbol)."""
    return 10.0 * math.log10(photons_per_symbol(budget, extra_modulation_loss_db))


def mzm_iq_modulation_loss(block: SymbolBlock, shape: PulseShape, modulation_depth: float) -> float:
    """Average optical loss (dB) of a null-biased IQ MZM driven by the shaped block.

    I and Q drives share one scale so the largest |drive| sample hits
    ``modulation_depth * V_pi``.  Each MZM has field transfer
    sin(pi/2 * v/V_pi); splitter and combiner give the 3 dB IQ penalty.
    """
    if not 0 < modulation_depth <= 1:
        raise ValueError("modulation_depth must lie in (0, 1]")
    wave = shape_rrc(block, shape).samples
    i_drive = np.ascontiguousarray(wave.real)
    q_drive = np.ascontiguousarray(wave.imag)
    peak = max(np.max(np.abs(i_drive)), np.max(np.abs(q_drive)))
    if peak == 0:
        return SDR_CAP_DB
    scale = 0.5 * math.pi * modulation_depth / peak
    power = float(np.mean(kernels.mzm_iq_power(i_drive, q_drive, scale)))
    if power <= 10 ** (-SDR_CAP_DB / 10):
        return SDR_CAP_DB
    return -10.0 * math.log10(power)


def combine_sinad(component_snrs_db) -> float:
    """Add noise powers: -10 log10(sum 10**(-x/10))."""
    vals = np.asarray(list(component_snrs_db), dtype=float)
    if vals.size == 0:
        raise ValueError("need at least one component")
    total = float(np.sum(10.0 ** (-vals / 10.0)))
    if total == 0:
        return math.inf
    return -10.0 * math.log10(total)
