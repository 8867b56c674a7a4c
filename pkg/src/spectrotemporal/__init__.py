"""Phase-only spectro-temporal synthesis of QAM waveforms from CW light.

A cascade of phase modulators separated by dispersive elements is driven by
band-limited phase profiles found with wavefront matching.
"""

__version__ = "0.1.0"

from .channel import (
    Cascade,
    DispersiveElement,
    PhaseProfileSet,
    StageConfig,
    apply_dispersion,
    apply_phase_modulator,
    bandlimit_phase,
    dispersion_to_gdd,
    physical_dispersion,
    propagate_backward,
    propagate_forward,
)
from .config import RunConfig, SystemConfig
from .errors import (
    ConfigError,
    DimensionError,
    NumericDivergenceError,
    SpectroTemporalError,
    UndefinedMetricError,
    UnsupportedConstellationError,
)
from .metrics import (
    NoiseBudget,
    SdrReport,
    combine_sinad,
    compute_sdr,
    dispersive_efficiency_ratio,
    mzm_iq_modulation_loss,
    quantize_phase,
    quantized_sinad,
    shot_noise_snr,
)
from .signal import (
    ComplexWaveform,
    PulseShape,
    SymbolBlock,
    generate_qam_block,
    matched_filter_and_sample,
    qam_constellation,
    shape_rrc,
)
from .sweep import SweepResult, SweepSpec, run_sweep, write_csv
from .wavefront import Solution, SolverConfig, output_field, phase_update, solve

__all__ = [name for name in dir() if not name.startswith("_")]
