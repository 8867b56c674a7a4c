"""System configuration and the strict ``key = value`` run-config format.

Config files hold one ``key = value`` per line; ``#`` starts a comment and
lists are comma separated (integer lists also accept ``a-b`` ranges).
Unknown keys are rejected.  Keys carry their units in the name.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .channel import StageConfig
from .errors import ConfigError
from .signal import ComplexWaveform, PulseShape, SymbolBlock, generate_qam_block, shape_rrc
from .wavefront import SolverConfig


@dataclass(frozen=True)
class SystemConfig:
    """Everything needed to build and solve one transform instance."""

    constellation_order: int = 16
    block_length: int = 512
    oversampling: int = 8
    roll_off: float = 0.1
    rrc_span_symbols: int | None = None
    stage_count: int = 4
    stages: StageConfig = field(default_factory=StageConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)

    @property
    def pulse_shape(self) -> PulseShape:
        return PulseShape(self.roll_off, self.rrc_span_symbols, self.oversampling)

    def with_stages(self, **changes) -> "SystemConfig":
        return replace(self, stages=replace(self.stages, **changes))

    def build_target(self, seed: int) -> tuple[SymbolBlock, ComplexWaveform]:
        block = generate_qam_block(self.constellation_order, self.block_length, seed)
        return block, shape_rrc(block, self.pulse_shape)


def parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def parse_int_list(text: str) -> list[int]:
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part[1:]:
            lo, hi = part.split("-", 1) if not part.startswith("-") else (part, None)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    if not out:
        raise ValueError("empty list")
    return out


def parse_float_list(text: str) -> list[float]:
    t = text.strip()
    if t.startswith("linspace(") and t.endswith(")"):
        lo, hi, num = (s.strip() for s in t[len("linspace(") : -1].split(","))
        return [float(v) for v in np.linspace(float(lo), float(hi), int(num))]
    vals = [float(p) for p in t.split(",") if p.strip()]
    if not vals:
        raise ValueError("empty list")
    return vals


def _span(text):
    t = text.strip().lower()
    return None if t in ("periodic", "none", "0") else int(t)


def _iq_loss(text):
    t = text.strip().lower()
    return None if t == "computed" else float(t)


# key -> parser
KEYS = {
    # system
    "constellation_order": int,
    "block_length_symbols": int,
    "oversampling_sps": int,
    "rrc_roll_off": float,
    "rrc_span_symbols": _span,
    "stage_count": int,
    "seed": int,
    # stages
    "dispersion_psnm_norm": float,
    "pm_bandwidth_fs": float,
    "include_trailing_dispersion": parse_bool,
    "wavelength_nm": float,
    "symbol_rate_gbd": float,
    # solver
    "step_size": float,
    "max_iterations": int,
    "stall_tolerance_db": float,
    "stall_window": int,
    "step_decay": float,
    "min_step_size": float,
    "init_mode": str,
    "init_scale_rad": float,
    "init_seed": int,
    "target_mode": str,
    # sweeps
    "grid": parse_float_list,
    "stage_counts": parse_int_list,
    "seeds": parse_int_list,
    "average_mode": str,
    "workers": int,
    # noise / baseline
    "insertion_loss_db_per_stage": float,
    "quantum_efficiency": float,
    "iq_modulation_depth": float,
    "iq_loss_db": _iq_loss,
}


@dataclass
class RunConfig:
    """Parsed configuration values; absent keys fall back to defaults."""

    values: dict = field(default_factory=dict)

    def set(self, key: str, text: str) -> None:
        key = key.strip()
        if key not in KEYS:
            raise ConfigError(key, "unknown configuration key")
        try:
            self.values[key] = KEYS[key](text.strip())
        except (TypeError, ValueError) as exc:
            raise ConfigError(key, f"cannot parse {text.strip()!r}: {exc}") from None

    def update(self, other: dict) -> None:
        """Merge already-parsed values (e.g. per-subcommand defaults)."""
        for k, v in other.items():
            if k not in KEYS:
                raise ConfigError(k, "unknown configuration key")
            self.values[k] = v

    def get(self, key, default=None):
        return self.values.get(key, default)

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        cfg = cls()
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}", f"expected 'key = value', got {raw!r}")
            k, v = line.split("=", 1)
            cfg.set(k, v)
        return cfg

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        return cls.from_text(Path(path).read_text())

    def as_dict(self) -> dict:
        return {k: (v if not isinstance(v, tuple) else list(v)) for k, v in sorted(self.values.items())}

    # builders ---------------------------------------------------------

    def stage_config(self) -> StageConfig:
        d = StageConfig()
        return StageConfig(
            dispersion_norm=self.get("dispersion_psnm_norm", d.dispersion_norm),
            pm_bandwidth=self.get("pm_bandwidth_fs", d.pm_bandwidth),
            include_trailing_dispersion=self.get(
                "include_trailing_dispersion", d.include_trailing_dispersion
            ),
            wavelength_nm=self.get("wavelength_nm", d.wavelength_nm),
            symbol_rate_gbd=self.get("symbol_rate_gbd", d.symbol_rate_gbd),
        )

    def solver_config(self) -> SolverConfig:
        d = SolverConfig()
        step = self.get("step_size", d.step_size)
        try:
            return SolverConfig(
                step_size=step,
                max_iterations=self.get("max_iterations", d.max_iterations),
                stall_tolerance_db=self.get("stall_tolerance_db", d.stall_tolerance_db),
                stall_window=self.get("stall_window", d.stall_window),
                init_mode=self.get("init_mode", d.init_mode),
                init_scale=self.get("init_scale_rad", d.init_scale),
                init_seed=self.get("init_seed", d.init_seed),
                step_decay=self.get("step_decay", d.step_decay),
                min_step_size=self.get("min_step_size", min(d.min_step_size, step)),
                target_mode=self.get("target_mode", d.target_mode),
            )
        except ValueError as exc:
            raise ConfigError("solver", str(exc)) from None

    def system_config(self) -> SystemConfig:
        d = SystemConfig()
        try:
            system = SystemConfig(
                constellation_order=self.get("constellation_order", d.constellation_order),
                block_length=self.get("block_length_symbols", d.block_length),
                oversampling=self.get("oversampling_sps", d.oversampling),
                roll_off=self.get("rrc_roll_off", d.roll_off),
                rrc_span_symbols=self.get("rrc_span_symbols", d.rrc_span_symbols),
                stage_count=self.get("stage_count", d.stage_count),
                stages=self.stage_config(),
                solver=self.solver_config(),
            )
            system.pulse_shape
            system.stages.check_grid(system.oversampling)
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError("system", str(exc)) from None
        return system
