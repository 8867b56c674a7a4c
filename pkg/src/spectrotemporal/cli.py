"""Command-line entry point: ``spectrotemporal solve | sweep-*``.

Exit status: 0 on success, 2 for configuration errors, 3 when any solve
diverged.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np
from scipy.signal import periodogram

from . import __version__
from ._kernels import kernels
from .config import RunConfig, parse_int_list
from .errors import ConfigError, NumericDivergenceError
from .metrics import dispersive_efficiency_ratio
from .signal import matched_filter_and_sample
from .sweep import DEFAULT_GRIDS, SweepSpec, run_sweep, sweep_metadata, write_csv, write_metadata
from .wavefront import output_field, solve, write_trace_csv

log = logging.getLogger("spectrotemporal")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGED = 3

# Per-subcommand defaults, applied before the config file and --set overrides.
SWEEPS = {
    "sweep-dispersion": ("dispersion", "sdr_dispersion", {"pm_bandwidth_fs": 0.55}),
    "sweep-bandwidth": ("pm_bandwidth", "sdr_bandwidth", {"dispersion_psnm_norm": 0.1}),
    "sweep-dac": ("dac_bits", "sinad_dac_bits", {"dispersion_psnm_norm": 0.3, "pm_bandwidth_fs": 0.55}),
    "sweep-laser": ("laser_power", "sinad_laser_power", {"dispersion_psnm_norm": 0.3, "pm_bandwidth_fs": 0.55}),
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spectrotemporal", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in ["solve", *SWEEPS]:
        sp = sub.add_parser(name)
        sp.add_argument("--config", type=Path, help="key = value config file")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override one config key (repeatable)")
        sp.add_argument("--seed-list", help="seeds, e.g. '0-9' or '0,3,5'")
        sp.add_argument("--max-iters", type=int, help="solver iteration cap")
        sp.add_argument("--out-dir", type=Path, default=Path("out"))
        sp.add_argument("-v", "--verbose", action="store_true")
        if name != "solve":
            sp.add_argument("--workers", type=int, help="worker processes (default 1)")
            sp.add_argument("--linear-average", action="store_true",
                            help="average seeds in linear power instead of dB")
    return p


def load_config(args, defaults=None) -> RunConfig:
    cfg = RunConfig()
    cfg.update(defaults or {})
    if args.config is not None:
        try:
            text = args.config.read_text()
        except OSError as exc:
            raise ConfigError("--config", str(exc)) from None
        for k, v in RunConfig.from_text(text).values.items():
            cfg.values[k] = v
    for item in args.set:
        if "=" not in item:
            raise ConfigError(item, "expected KEY=VALUE")
        k, v = item.split("=", 1)
        cfg.set(k, v)
    if args.seed_list is not None:
        cfg.set("seeds", args.seed_list)
    if args.max_iters is not None:
        cfg.set("max_iterations", str(args.max_iters))
    if getattr(args, "workers", None) is not None:
        cfg.set("workers", str(args.workers))
    if getattr(args, "linear_average", False):
        cfg.set("average_mode", "linear")
    return cfg


def _write_rows(path: Path, header, columns) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in zip(*columns):
            w.writerow([format(float(v), ".10g") for v in row])


def drive_psd(phases: np.ndarray, sample_rate: float, floor_db: float = -200.0):
    """One-sided periodogram of each mean-removed drive, 0 dB at its own peak."""
    f, pxx = periodogram(phases, fs=sample_rate, window="boxcar", detrend="constant", axis=-1)
    out = []
    for row in np.atleast_2d(pxx):
        peak = row.max()
        db = 10 * np.log10(np.maximum(row / peak, 10 ** (floor_db / 10))) if peak > 0 else np.full_like(row, floor_db)
        out.append(db)
    return f, np.array(out)


def cmd_solve(cfg: RunConfig, out_dir: Path) -> int:
    system = cfg.system_config()
    seeds = cfg.get("seeds")
    seed = cfg.get("seed", seeds[0] if seeds else 0)
    block, target = system.build_target(seed)
    shape = system.pulse_shape
    sr = float(shape.oversampling)
    try:
        sol = solve(target, system.stages, system.stage_count, system.solver, reference=block, shape=shape)
    except NumericDivergenceError as exc:
        log.error("%s", exc)
        return EXIT_DIVERGED

    out_dir.mkdir(parents=True, exist_ok=True)
    phases = sol.phases.profiles
    t = np.arange(phases.shape[1]) / sr
    N = phases.shape[0]
    _write_rows(out_dir / "phases.csv", ["time"] + [f"phi{i + 1}" for i in range(N)], [t, *phases])
    f, psd = drive_psd(phases, sr)
    _write_rows(out_dir / "psd.csv", ["freq"] + [f"stage{i + 1}_db" for i in range(N)], [f, *psd])
    rec = matched_filter_and_sample(output_field(sol, system.stages, sr), shape)
    gain = np.vdot(rec, block.symbols) / max(np.vdot(rec, rec).real, 1e-300)
    rec = gain * rec
    _write_rows(out_dir / "constellation.csv", ["I", "Q"], [rec.real, rec.imag])
    write_trace_csv(sol, out_dir / "trace.csv")
    summary = {
        "sdr_db": sol.sdr_db,
        "iterations": sol.iterations_used,
        "converged": sol.converged,
        "dispersive_efficiency_ratio": dispersive_efficiency_ratio(target),
    }
    write_metadata(summary, out_dir / "summary.json")
    write_metadata(
        {
            "command": "solve",
            "seed": seed,
            "config": cfg.as_dict(),
            "system": asdict(system),
            "package_version": __version__,
            "numpy_version": np.__version__,
            "backend": kernels.name,
        },
        out_dir / "metadata.json",
    )
    log.info("SDR %.2f dB after %d iterations", sol.sdr_db, sol.iterations_used)
    print(json.dumps(summary))
    return EXIT_OK


def sweep_spec(cfg: RunConfig, axis: str) -> SweepSpec:
    system = cfg.system_config()
    d = SweepSpec(axis=axis, grid=DEFAULT_GRIDS[axis])
    try:
        return SweepSpec(
            axis=axis,
            grid=tuple(cfg.get("grid", d.grid)),
            stage_counts=tuple(cfg.get("stage_counts", d.stage_counts)),
            seeds=tuple(cfg.get("seeds", d.seeds)),
            system=system,
            average=cfg.get("average_mode", d.average),
            insertion_loss_db_per_stage=cfg.get("insertion_loss_db_per_stage", d.insertion_loss_db_per_stage),
            quantum_efficiency=cfg.get("quantum_efficiency", d.quantum_efficiency),
            iq_modulation_depth=cfg.get("iq_modulation_depth", d.iq_modulation_depth),
            iq_loss_db=cfg.get("iq_loss_db", d.iq_loss_db),
        )
    except ValueError as exc:
        raise ConfigError("sweep", str(exc)) from None


def cmd_sweep(cfg: RunConfig, command: str, out_dir: Path) -> int:
    axis, stem, _ = SWEEPS[command]
    spec = sweep_spec(cfg, axis)
    result = run_sweep(spec, workers=cfg.get("workers", 1))
    write_csv(result, out_dir / f"{stem}.csv")
    meta = sweep_metadata(result)
    meta["config"] = cfg.as_dict()
    write_metadata(meta, out_dir / f"{stem}.json")
    if result.any_diverged:
        log.error("%d solves diverged", int(result.diverged.sum()))
        return EXIT_DIVERGED
    return EXIT_OK


def cmd_sweep_dispersion(cfg: RunConfig, out_dir: Path) -> int:
    return cmd_sweep(cfg, "sweep-dispersion", out_dir)


def cmd_sweep_bandwidth(cfg: RunConfig, out_dir: Path) -> int:
    return cmd_sweep(cfg, "sweep-bandwidth", out_dir)


def cmd_sweep_dac(cfg: RunConfig, out_dir: Path) -> int:
    return cmd_sweep(cfg, "sweep-dac", out_dir)


def cmd_sweep_laser(cfg: RunConfig, out_dir: Path) -> int:
    return cmd_sweep(cfg, "sweep-laser", out_dir)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    defaults = SWEEPS[args.command][2] if args.command in SWEEPS else {}
    try:
        cfg = load_config(args, defaults)
        if args.command == "solve":
            return cmd_solve(cfg, args.out_dir)
        return cmd_sweep(cfg, args.command, args.out_dir)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
