"""Wavefront-matching synthesis of phase drives for a CW-to-target cascade.

Each iteration carries a target field backwards through the cascade, then
sweeps the modulators in ascending order.  At modulator n the forward field
F_n (entering the modulator) is compared with the backward field B_n (on its
output side) and the drive is nudged by the phase of their low-passed
overlap:

    phi_n <- LP[ phi_n - mu * arg( LP[ F_n * conj(B_n) * exp(i phi_n) ] ) ]

Forward fields are refreshed after every stage update (Gauss-Seidel order).
The step size halves, down to a floor, whenever an iteration fails to beat
the best SDR so far, and that iteration is discarded.

Two backward targets are supported.  ``"waveform"`` propagates the shaped
target itself.  ``"projected"`` (default) propagates the field nearest to
the current output whose matched-filtered symbols equal the reference up to
a complex gain, leaving the out-of-band content that a phase-only cascade
cannot suppress unconstrained.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy import fft as sfft

from ._kernels import kernels
from .channel import (
    Cascade,
    PhaseProfileSet,
    StageConfig,
    bandlimit_phase,
    lowpass_mask,
)
from .errors import DimensionError, NumericDivergenceError, UndefinedMetricError
from .metrics import sdr_from_symbols
from .signal import ComplexWaveform, PulseShape, SymbolBlock, symbol_filter

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverConfig:
    step_size: float = 0.25
    max_iterations: int = 2000
    stall_tolerance_db: float = 0.01
    stall_window: int = 20
    init_mode: Literal["zeros", "random"] = "zeros"
    init_scale: float = 0.1
    init_seed: int = 0
    step_decay: float = 0.5
    min_step_size: float = 1e-3
    target_mode: Literal["projected", "waveform"] = "projected"

    def __post_init__(self):
        if not 0 < self.step_size <= 1:
            raise ValueError("step_size must lie in (0, 1]")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not self.stall_tolerance_db > 0:
            raise ValueError("stall_tolerance_db must be > 0")
        if self.stall_window < 1:
            raise ValueError("stall_window must be >= 1")
        if self.init_mode not in ("zeros", "random"):
            raise ValueError(f"unknown init_mode {self.init_mode!r}")
        if self.target_mode not in ("projected", "waveform"):
            raise ValueError(f"unknown target_mode {self.target_mode!r}")
        if not 0 < self.step_decay <= 1:
            raise ValueError("step_decay must lie in (0, 1]")
        if not 0 < self.min_step_size <= self.step_size:
            raise ValueError("min_step_size must lie in (0, step_size]")


@dataclass
class Solution:
    phases: PhaseProfileSet
    sdr_db: float
    iterations_used: int
    sdr_trace: list[float]
    converged: bool
    cw_amplitude: float
    step_trace: list[float] = field(default_factory=list)


def _update(f, b, phi, phasor, mu, cmask, rmask):
    o = kernels.overlap(f, b, phasor)
    o = sfft.ifft(sfft.fft(o) * cmask)
    stepped = phi - mu * np.angle(o)
    return sfft.irfft(sfft.rfft(stepped) * rmask, n=phi.size)


def phase_update(
    F_n: ComplexWaveform,
    B_n: ComplexWaveform,
    phi_n,
    mu: float,
    pm_bandwidth: float,
) -> np.ndarray:
    """One wavefront-matching step for a single modulator drive.

    ``F_n`` enters the modulator, ``B_n`` is the backward field on its
    output side.  Samples where the filtered overlap vanishes get no update.
    """
    phi_n = np.ascontiguousarray(phi_n, dtype=np.float64)
    if not (len(F_n) == len(B_n) == phi_n.size):
        raise DimensionError("F_n, B_n and phi_n must share one length")
    if mu <= 0:
        if mu == 0:
            return phi_n.copy()
        raise ValueError("mu must be > 0")
    sr = F_n.sample_rate
    n = phi_n.size
    cmask = lowpass_mask(n, pm_bandwidth, float(sr))
    rmask = lowpass_mask(n, pm_bandwidth, float(sr), real=True)
    return _update(F_n.samples, B_n.samples, phi_n, kernels.phasor(phi_n), mu, cmask, rmask)


def _initial_phases(config: SolverConfig, stage_count, n, stages, sample_rate):
    if config.init_mode == "zeros":
        return np.zeros((stage_count, n))
    rng = np.random.default_rng(config.init_seed)
    raw = rng.normal(0.0, config.init_scale, size=(stage_count, n))
    return bandlimit_phase(raw, stages.pm_bandwidth, sample_rate)


def solve(
    target: ComplexWaveform,
    stages: StageConfig,
    stage_count: int,
    solver: SolverConfig | None = None,
    *,
    reference: SymbolBlock | None = None,
    shape: PulseShape | None = None,
) -> Solution:
    """Find N phase drives turning CW light into ``target``.

    SDR is measured on matched-filtered symbols against ``reference``
    (default: the target's own matched-filter output).  The CW amplitude is
    set so the input power equals the target's mean power.
    """
    solver = solver or SolverConfig()
    if stage_count < 1:
        raise ValueError("stage_count must be >= 1")
    sr = float(target.sample_rate)
    sps = int(round(sr))
    if sps != sr:
        raise DimensionError("target sample rate must be an integer number of samples/symbol")
    shape = shape or PulseShape(oversampling=sps)
    if shape.oversampling != sps:
        raise DimensionError("pulse oversampling does not match the target sample rate")
    n = len(target)
    if n % sps:
        raise DimensionError("target length is not a whole number of symbols")
    stages.check_grid(sr)
    if target.energy <= 0:
        raise UndefinedMetricError("target has zero energy")

    filt = symbol_filter(shape, n // sps)
    ref = filt.analyze(target.samples) if reference is None else reference.symbols
    if ref.size != n // sps:
        raise DimensionError("reference block length does not match the target")

    cas = Cascade.from_stages(stages, stage_count, n, sr)
    cmask = lowpass_mask(n, stages.pm_bandwidth, sr)
    rmask = lowpass_mask(n, stages.pm_bandwidth, sr, real=True)
    cw_amp = float(np.sqrt(target.mean_power))
    cw = np.full(n, cw_amp, dtype=np.complex128)
    ref_energy = float(np.vdot(ref, ref).real)

    phi = _initial_phases(solver, stage_count, n, stages, sr)
    x = cas.output(cw, phi)
    rec = filt.analyze(x)
    best = sdr_from_symbols(rec, ref).sdr_db
    ph = np.array([kernels.phasor(p) for p in phi])
    best_phi, best_ph, best_x, best_rec = phi.copy(), ph.copy(), x, rec
    mu = solver.step_size
    trace = [best]
    steps = [mu]
    converged = False
    k = 0

    for k in range(1, solver.max_iterations + 1):
        if solver.target_mode == "projected":
            gain = np.vdot(ref, best_rec) / ref_energy
            tgt = best_x + filt.synthesize(gain * ref - best_rec)
        else:
            tgt = target.samples
        back = cas.backward_phasors(tgt, ph)

        x = cw
        for s in range(stage_count):
            phi[s] = _update(x, back[s], phi[s], ph[s], mu, cmask, rmask)
            ph[s] = kernels.phasor(phi[s])
            x = x * ph[s]
            if cas.has_dispersion_after(s):
                x = cas.disperse(x)

        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(phi))):
            raise NumericDivergenceError(k)

        rec = filt.analyze(x)
        sdr = sdr_from_symbols(rec, ref).sdr_db
        if sdr >= best:
            best, best_x, best_rec = sdr, x, rec
            best_phi, best_ph = phi.copy(), ph.copy()
        else:
            mu = max(mu * solver.step_decay, solver.min_step_size)
            phi, ph = best_phi.copy(), best_ph.copy()
        trace.append(best)
        steps.append(mu)

        w = solver.stall_window
        if k >= w and trace[-1] - trace[-1 - w] < solver.stall_tolerance_db:
            converged = True
            break

    log.debug("solve: N=%d sdr=%.2f dB after %d iterations", stage_count, best, k)
    return Solution(
        phases=PhaseProfileSet(best_phi),
        sdr_db=best,
        iterations_used=k,
        sdr_trace=trace,
        converged=converged,
        cw_amplitude=cw_amp,
        step_trace=steps,
    )


def output_field(solution: Solution, stages: StageConfig, sample_rate: float) -> ComplexWaveform:
    """Cascade output for the solved drives."""
    p = solution.phases
    cas = Cascade.from_stages(stages, p.stage_count, p.length, sample_rate)
    cw = np.full(p.length, solution.cw_amplitude, dtype=np.complex128)
    return ComplexWaveform(cas.output(cw, p.profiles), sample_rate)


def write_trace_csv(solution: Solution, path) -> None:
    """Per-iteration dump: iteration, best SDR (dB), step size."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iteration", "sdr_db", "step_size"])
        for i, (s, mu) in enumerate(zip(solution.sdr_trace, solution.step_trace)):
            w.writerow([i, f"{s:.10g}", f"{mu:.10g}"])
