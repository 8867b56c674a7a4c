"""Target waveform synthesis: square QAM, RRC pulse shaping, matched filtering.

All filtering is circular over one symbol block.  With the default
``span_symbols=None`` the RRC pulse is the closed-form RRC periodized over
the block, built from its sampled spectrum, so shaping followed by matched
filtering is the identity to machine precision.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import fft as sfft

from .errors import DimensionError, UnsupportedConstellationError


@dataclass(frozen=True)
class ComplexWaveform:
    """Uniformly sampled complex field envelope.

    ``sample_rate`` is in units of the symbol rate (8.0 = 8 samples/symbol).
    """

    samples: np.ndarray
    sample_rate: float

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.complex128)
        if samples.ndim != 1 or samples.size < 1:
            raise DimensionError("waveform samples must be a non-empty 1-D sequence")
        if not self.sample_rate > 0:
            raise ValueError("sample_rate must be positive")
        object.__setattr__(self, "samples", samples)

    def __len__(self):
        return self.samples.size

    @property
    def energy(self) -> float:
        return float(np.vdot(self.samples, self.samples).real)

    @property
    def mean_power(self) -> float:
        return self.energy / self.samples.size


@dataclass(frozen=True)
class SymbolBlock:
    symbols: np.ndarray
    constellation_order: int
    seed: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "symbols", np.asarray(self.symbols, dtype=np.complex128))

    def __len__(self):
        return self.symbols.size


@dataclass(frozen=True)
class PulseShape:
    """RRC pulse.  ``span_symbols=None`` means periodic over the whole block."""

    roll_off: float = 0.1
    span_symbols: int | None = None
    oversampling: int = 8

    def __post_init__(self):
        if not 0.0 <= self.roll_off <= 1.0:
            raise ValueError("roll_off must lie in [0, 1]")
        if self.oversampling < 2:
            raise ValueError("oversampling must be >= 2")
        if self.span_symbols is not None and self.span_symbols < 8:
            raise ValueError("span_symbols must be >= 8 (or None for periodic)")


def qam_constellation(order: int) -> np.ndarray:
    """Gray-labelled square QAM points at unit average power, indexed by label."""
    side = int(round(np.sqrt(order))) if order >= 1 else 0
    if order < 4 or side * side != order:
        raise UnsupportedConstellationError(f"order {order} is not a square QAM order >= 4")
    levels = np.arange(-(side - 1), side, 2, dtype=float)
    pam = np.empty(side)
    if side & (side - 1) == 0:
        # binary-reflected Gray code per rail
        pam[np.arange(side) ^ (np.arange(side) >> 1)] = levels
    else:
        pam[:] = levels
    labels = np.arange(order)
    points = pam[labels // side] + 1j * pam[labels % side]
    return points / np.sqrt(np.mean(np.abs(points) ** 2))


def generate_qam_block(order: int, block_length: int, seed: int) -> SymbolBlock:
    """Draw ``block_length`` uniform symbols from Gray-mapped square ``order``-QAM."""
    if block_length < 1:
        raise ValueError("block_length must be >= 1")
    points = qam_constellation(order)
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, order, size=block_length)
    return SymbolBlock(points[labels], order, seed)


def rrc_closed_form(t: np.ndarray, roll_off: float) -> np.ndarray:
    """Continuous-time RRC impulse response at ``t`` (symbol periods), peak-unnormalised."""
    t = np.asarray(t, dtype=float)
    b = roll_off
    h = np.empty_like(t)
    at_zero = np.isclose(t, 0.0, atol=1e-12)
    if b > 0:
        at_sing = np.isclose(np.abs(4 * b * t), 1.0, atol=1e-9)
    else:
        at_sing = np.zeros_like(at_zero)
    rest = ~(at_zero | at_sing)
    h[at_zero] = 1.0 - b + 4.0 * b / np.pi
    if b > 0:
        h[at_sing] = (b / np.sqrt(2.0)) * (
            (1 + 2 / np.pi) * np.sin(np.pi / (4 * b)) + (1 - 2 / np.pi) * np.cos(np.pi / (4 * b))
        )
    tr = t[rest]
    h[rest] = (np.sin(np.pi * tr * (1 - b)) + 4 * b * tr * np.cos(np.pi * tr * (1 + b))) / (
        np.pi * tr * (1 - (4 * b * tr) ** 2)
    )
    return h


def rrc_taps(shape: PulseShape) -> np.ndarray:
    """Truncated unit-energy RRC taps, ``span_symbols * oversampling + 1`` long, centred."""
    if shape.span_symbols is None:
        raise ValueError("rrc_taps needs a finite span_symbols")
    half = shape.span_symbols * shape.oversampling // 2
    t = np.arange(-half, half + 1) / shape.oversampling
    h = rrc_closed_form(t, shape.roll_off)
    return h / np.linalg.norm(h)


def rrc_spectrum(f: np.ndarray, roll_off: float) -> np.ndarray:
    """Square-root raised-cosine amplitude at frequencies ``f`` (units of f_s)."""
    af = np.abs(np.asarray(f, dtype=float))
    f1 = (1.0 - roll_off) / 2.0
    f2 = (1.0 + roll_off) / 2.0
    out = np.zeros_like(af)
    out[af <= f1] = 1.0
    if roll_off == 0:
        # brick wall: half power on the edge keeps |H(f)|^2 + |H(f-1)|^2 = 1
        out[af == f1] = np.sqrt(0.5)
    else:
        edge = (af > f1) & (af <= f2)
        out[edge] = np.sqrt(0.5 * (1.0 + np.cos(np.pi / roll_off * (af[edge] - f1))))
    return out


@lru_cache(maxsize=64)
def _pulse_spectrum(roll_off, span_symbols, oversampling, block_length):
    n = block_length * oversampling
    if span_symbols is None:
        f = np.fft.fftfreq(n, d=1.0 / oversampling)
        spec = rrc_spectrum(f, roll_off).astype(np.complex128)
        # unit-energy taps: sum|h|^2 = sum|H|^2 / n
        spec *= np.sqrt(n / np.sum(np.abs(spec) ** 2))
    else:
        taps = rrc_taps(PulseShape(roll_off, span_symbols, oversampling))
        if taps.size > n:
            raise DimensionError("RRC span longer than the block")
        half = taps.size // 2
        circ = np.zeros(n, dtype=np.complex128)
        idx = np.arange(-half, half + 1) % n
        np.add.at(circ, idx, taps)
        spec = np.fft.fft(circ)
    spec.setflags(write=False)
    return spec


def pulse_spectrum(shape: PulseShape, block_length: int) -> np.ndarray:
    """DFT of the circular pulse on a ``block_length * oversampling`` grid (read-only)."""
    return _pulse_spectrum(shape.roll_off, shape.span_symbols, shape.oversampling, block_length)


def pulse_taps(shape: PulseShape, block_length: int) -> np.ndarray:
    """Circular time-domain pulse, centred at sample 0."""
    return np.fft.ifft(pulse_spectrum(shape, block_length)).real


class SymbolFilter:
    """Circular RRC synthesis/analysis pair for one block geometry.

    ``synthesize`` upsamples and pulse-shapes symbols; ``analyze`` matched
    filters and samples at symbol instants.  Both work in the frequency
    domain, folding/tiling the spectrum instead of touching the zero-stuffed
    time series.
    """

    def __init__(self, shape: PulseShape, block_length: int):
        self.shape = shape
        self.block_length = block_length
        self.sps = shape.oversampling
        self.n = block_length * self.sps
        self._h = pulse_spectrum(shape, block_length)
        self._hc = np.conj(self._h)

    def synthesize(self, symbols: np.ndarray) -> np.ndarray:
        spec = sfft.fft(symbols)
        return sfft.ifft(np.tile(spec, self.sps) * self._h)

    def analyze(self, samples: np.ndarray) -> np.ndarray:
        spec = sfft.fft(samples) * self._hc
        folded = spec.reshape(self.sps, self.block_length).sum(axis=0)
        return sfft.ifft(folded) / self.sps


@lru_cache(maxsize=32)
def symbol_filter(shape: PulseShape, block_length: int) -> SymbolFilter:
    return SymbolFilter(shape, block_length)


def shape_rrc(block: SymbolBlock, shape: PulseShape) -> ComplexWaveform:
    """Pulse-shape ``block`` with circular unit-energy RRC filtering."""
    filt = symbol_filter(shape, len(block))
    return ComplexWaveform(filt.synthesize(block.symbols), float(shape.oversampling))


def matched_filter_and_sample(wave: ComplexWaveform, shape: PulseShape) -> np.ndarray:
    """Circular matched filter, sampled at the symbol instants."""
    if wave.sample_rate != shape.oversampling:
        raise DimensionError(
            f"waveform sample rate {wave.sample_rate} != pulse oversampling {shape.oversampling}"
        )
    n = len(wave)
    if n % shape.oversampling:
        raise DimensionError("waveform length is not a whole number of symbols")
    filt = symbol_filter(shape, n // shape.oversampling)
    return filt.analyze(wave.samples)
