"""Compare the numba and numpy kernel backends.

    python3 benchmarks/bench_kernels.py [--length 4096] [--solve-iters 200]

Micro-benchmarks run in-process; the end-to-end solve runs once per backend
in a subprocess because the backend is fixed at import time.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from spectrotemporal._kernels import HAVE_NUMBA, numba_kernels, numpy_kernels

SOLVE_SNIPPET = """
import time
from spectrotemporal import SolverConfig, SystemConfig, solve
from spectrotemporal._kernels import kernels
sys_ = SystemConfig(solver=SolverConfig(max_iterations={iters}, stall_window=10**6))
block, target = sys_.build_target(0)
solve(target, sys_.stages, 4, SolverConfig(max_iterations=2), reference=block, shape=sys_.pulse_shape)
t0 = time.perf_counter()
sol = solve(target, sys_.stages, 4, sys_.solver, reference=block, shape=sys_.pulse_shape)
dt = time.perf_counter() - t0
print(kernels.name, dt, sol.sdr_db)
"""


def bench(fn, repeat=5, number=200):
    fn()  # warm-up / JIT
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number


def micro(length):
    rng = np.random.default_rng(0)
    x = rng.normal(size=length) + 1j * rng.normal(size=length)
    b = rng.normal(size=length) + 1j * rng.normal(size=length)
    phi = rng.uniform(-np.pi, np.pi, size=length)
    ph = np.exp(1j * phi)
    cases = {
        "phasor": lambda k: k.phasor(phi),
        "modulate": lambda k: k.modulate(x, phi, 1.0),
        "overlap": lambda k: k.overlap(x, b, ph),
        "quantize_midrise": lambda k: k.quantize_midrise(phi, 6),
        "mzm_iq_power": lambda k: k.mzm_iq_power(x.real, x.imag, 0.3),
    }
    backends = [numpy_kernels] + ([numba_kernels] if HAVE_NUMBA else [])
    print(f"{'kernel':<18}" + "".join(f"{k.name + ' [us]':>14}" for k in backends) + f"{'speedup':>10}")
    for name, case in cases.items():
        times = [bench(lambda k=k: case(k)) * 1e6 for k in backends]
        speed = f"{times[0] / times[1]:>10.2f}" if len(times) > 1 else ""
        print(f"{name:<18}" + "".join(f"{t:>14.1f}" for t in times) + speed)


def end_to_end(iters):
    names = ["numpy"] + (["numba"] if HAVE_NUMBA else [])
    print(f"\nsolve, N=4, 512 symbols x 8 sps, {iters} iterations")
    for name in names:
        env = dict(os.environ, SPECTROTEMPORAL_BACKEND=name)
        out = subprocess.run(
            [sys.executable, "-c", SOLVE_SNIPPET.format(iters=iters)],
            env=env, capture_output=True, text=True, check=True,
        ).stdout.split()
        print(f"  {out[0]:<6} {float(out[1]):8.2f} s   {float(out[1]) / iters * 1e3:6.2f} ms/iter   SDR {float(out[2]):.2f} dB")


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--length", type=int, default=4096)
    p.add_argument("--solve-iters", type=int, default=200)
    args = p.parse_args()
    micro(args.length)
    if args.solve_iters > 0:
        end_to_end(args.solve_iters)


if __name__ == "__main__":
    main()
