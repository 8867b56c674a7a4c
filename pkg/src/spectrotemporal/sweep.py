"""Parameter sweeps over dispersion, PM bandwidth, DAC resolution and laser power.

A sweep solves one phase set per (grid point, stage count, seed) and
aggregates across seeds into mean / min / max rows.  The DAC and laser
axes do not change the solution itself, so those solve once per
(stage count, seed) and evaluate every grid point from it.
"""

from __future__ import annotations

import json
import logging
import math
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Literal

import numpy as np

from .config import SystemConfig
from .errors import NumericDivergenceError
from .metrics import NoiseBudget, combine_sinad, mzm_iq_modulation_loss, quantized_sinad, shot_noise_snr
from .wavefront import solve

log = logging.getLogger(__name__)

Axis = Literal["dispersion", "pm_bandwidth", "dac_bits", "laser_power"]

AXIS_LABELS = {
    "dispersion": "disp",
    "pm_bandwidth": "bw",
    "dac_bits": "bits",
    "laser_power": "laser_powers",
}

DEFAULT_GRIDS = {
    "dispersion": tuple(np.linspace(0.0, 0.5, 11)),
    "pm_bandwidth": tuple(np.linspace(0.05, 1.5, 12)),
    "dac_bits": tuple(float(b) for b in range(1, 13)),
    "laser_power": tuple(np.linspace(-30.0, 20.0, 11)),
}


@dataclass(frozen=True)
class SweepSpec:
    axis: Axis
    grid: tuple[float, ...]
    stage_counts: tuple[int, ...] = (1, 2, 3, 4, 5, 6)
    seeds: tuple[int, ...] = tuple(range(10))
    system: SystemConfig = field(default_factory=SystemConfig)
    average: Literal["db", "linear"] = "db"
    insertion_loss_db_per_stage: float = 2.0
    quantum_efficiency: float = 1.0
    iq_modulation_depth: float = 0.3
    # None: derive the IQ loss from the MZM model instead of a fixed figure
    iq_loss_db: float | None = 21.0

    def __post_init__(self):
        if self.axis not in AXIS_LABELS:
            raise ValueError(f"unknown sweep axis {self.axis!r}")
        if not self.grid:
            raise ValueError("empty sweep grid")
        if not self.stage_counts or min(self.stage_counts) < 1:
            raise ValueError("stage_counts must be positive")
        if not self.seeds:
            raise ValueError("need at least one seed")
        if self.average not in ("db", "linear"):
            raise ValueError(f"unknown average mode {self.average!r}")
        if self.axis == "dac_bits" and any(b < 1 or b != int(b) for b in self.grid):
            raise ValueError("dac_bits grid must hold positive integers")


@dataclass
class SweepResult:
    spec: SweepSpec
    mean: np.ndarray  # (grid, stage_counts)
    lower: np.ndarray
    upper: np.ndarray
    diverged: np.ndarray  # number of diverged seeds per cell
    extra: dict = field(default_factory=dict)  # column -> (mean, lower, upper)
    elapsed_s: float = 0.0

    @property
    def any_diverged(self) -> bool:
        return bool(np.any(self.diverged))


def _solve_one(system: SystemConfig, stage_count: int, seed: int):
    block, target = system.build_target(seed)
    sol = solve(
        target,
        system.stages,
        stage_count,
        system.solver,
        reference=block,
        shape=system.pulse_shape,
    )
    return block, sol


def _run_task(task):
    """Worker entry point.  Returns a list of metric values, or None on divergence."""
    spec, gi, stage_count, seed = task
    system = spec.system
    if spec.axis == "dispersion":
        system = system.with_stages(dispersion_norm=float(spec.grid[gi]))
    elif spec.axis == "pm_bandwidth":
        system = system.with_stages(pm_bandwidth=float(spec.grid[gi]))
    try:
        block, sol = _solve_one(system, stage_count, seed)
    except NumericDivergenceError as exc:
        log.warning("N=%d seed=%d diverged: %s", stage_count, seed, exc)
        return None
    if spec.axis in ("dispersion", "pm_bandwidth"):
        return [sol.sdr_db]
    if spec.axis == "dac_bits":
        return [
            quantized_sinad(sol, int(b), system.stages, block, system.pulse_shape) for b in spec.grid
        ]
    out = []
    for p in spec.grid:
        shot = shot_noise_snr(_budget(spec, float(p), stage_count))
        out.append(combine_sinad([sol.sdr_db, shot]))
    return out


def _budget(spec: SweepSpec, power_dbm: float, stage_count: int) -> NoiseBudget:
    st = spec.system.stages
    return NoiseBudget(
        laser_power_dbm=power_dbm,
        insertion_loss_db_per_stage=spec.insertion_loss_db_per_stage,
        stage_count=stage_count,
        symbol_rate_ghz=st.symbol_rate_gbd,
        wavelength_nm=st.wavelength_nm,
        quantum_efficiency=spec.quantum_efficiency,
    )


def _tasks(spec: SweepSpec):
    if spec.axis in ("dispersion", "pm_bandwidth"):
        return [
            (spec, gi, n, s)
            for gi in range(len(spec.grid))
            for n in spec.stage_counts
            for s in spec.seeds
        ]
    return [(spec, None, n, s) for n in spec.stage_counts for s in spec.seeds]


def aggregate(values, average: str = "db") -> tuple[float, float, float]:
    """(mean, min, max) over finite seed values; mean taken in dB or in linear power."""
    v = np.asarray([x for x in values if x is not None and np.isfinite(x)], dtype=float)
    if v.size == 0:
        return math.nan, math.nan, math.nan
    if average == "linear":
        m = 10.0 * math.log10(float(np.mean(10.0 ** (v / 10.0))))
    else:
        m = float(np.mean(v))
    return m, float(v.min()), float(v.max())


def _map(tasks, workers):
    if workers is None or workers <= 1 or len(tasks) <= 1:
        return [_run_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_task, tasks, chunksize=1))


def run_sweep(spec: SweepSpec, workers: int | None = 1) -> SweepResult:
    """Run every solve of ``spec``; results do not depend on ``workers``."""
    t0 = time.perf_counter()
    tasks = _tasks(spec)
    results = _map(tasks, workers)

    G, K = len(spec.grid), len(spec.stage_counts)
    per_cell: dict[tuple[int, int], list] = {(g, k): [] for g in range(G) for k in range(K)}
    k_of = {n: k for k, n in enumerate(spec.stage_counts)}
    for (_, gi, n, _seed), res in zip(tasks, results):
        k = k_of[n]
        if gi is not None:
            per_cell[gi, k].append(None if res is None else res[0])
        else:
            for g in range(G):
                per_cell[g, k].append(None if res is None else res[g])

    mean = np.full((G, K), np.nan)
    lower = np.full((G, K), np.nan)
    upper = np.full((G, K), np.nan)
    diverged = np.zeros((G, K), dtype=int)
    for (g, k), vals in per_cell.items():
        mean[g, k], lower[g, k], upper[g, k] = aggregate(vals, spec.average)
        diverged[g, k] = sum(v is None for v in vals)

    extra = {}
    if spec.axis == "laser_power":
        extra["IQ"] = _iq_column(spec)
    return SweepResult(spec, mean, lower, upper, diverged, extra, time.perf_counter() - t0)


def iq_baseline_loss(spec: SweepSpec) -> list[float]:
    """Per-seed IQ MZM loss: the fixed figure, or the MZM model when unset."""
    if spec.iq_loss_db is not None:
        return [spec.iq_loss_db] * len(spec.seeds)
    system = spec.system
    return [
        mzm_iq_modulation_loss(system.build_target(s)[0], system.pulse_shape, spec.iq_modulation_depth)
        for s in spec.seeds
    ]


def _iq_column(spec: SweepSpec):
    losses = iq_baseline_loss(spec)
    rows = []
    for p in spec.grid:
        budget = _budget(spec, float(p), 0)
        rows.append(aggregate([shot_noise_snr(budget, loss) for loss in losses], spec.average))
    arr = np.array(rows)
    return arr[:, 0], arr[:, 1], arr[:, 2]


# output -----------------------------------------------------------------


def _fmt(x) -> str:
    return format(float(x), ".10g")


def _grid_cell(axis, x) -> str:
    return str(int(x)) if axis == "dac_bits" else _fmt(x)


def _write_table(path: Path, result: SweepResult, which: int) -> None:
    spec = result.spec
    table = (result.mean, result.lower, result.upper)[which]
    header = [AXIS_LABELS[spec.axis]] + [str(n) for n in spec.stage_counts] + list(result.extra)
    lines = [",".join(header)]
    for g, x in enumerate(spec.grid):
        row = [_grid_cell(spec.axis, x)] + [_fmt(v) for v in table[g]]
        row += [_fmt(cols[which][g]) for cols in result.extra.values()]
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n")


def write_csv(result: SweepResult, path) -> list[Path]:
    """Write the mean table, plus ``_upper``/``_lower`` companions when seeds > 1."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    written = [path]
    _write_table(path, result, 0)
    if len(result.spec.seeds) > 1:
        for suffix, which in (("_upper", 2), ("_lower", 1)):
            p = path.with_name(path.stem + suffix + path.suffix)
            _write_table(p, result, which)
            written.append(p)
    return written


def read_csv(path) -> tuple[list[str], np.ndarray]:
    lines = Path(path).read_text().strip().splitlines()
    header = lines[0].split(",")
    data = np.array([[float(c) for c in ln.split(",")] for ln in lines[1:]])
    return header, data


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def sweep_metadata(result: SweepResult, include_timing: bool = False) -> dict:
    from . import __version__
    from ._kernels import kernels

    meta = {
        "axis": result.spec.axis,
        "spec": _jsonable(asdict(result.spec)),
        "diverged": result.diverged.tolist(),
        "package_version": __version__,
        "numpy_version": np.__version__,
        "backend": kernels.name,
        "python": platform.python_version(),
    }
    if include_timing:
        meta["elapsed_s"] = result.elapsed_s
    return meta


def write_metadata(meta: dict, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return path


def with_grid(spec: SweepSpec, grid) -> SweepSpec:
    return replace(spec, grid=tuple(float(g) for g in grid))
