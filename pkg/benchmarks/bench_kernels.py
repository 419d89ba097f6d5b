"""Compare the numba and numpy kernel families.

    python3 benchmarks/bench_kernels.py [--repeat 200]

Prints per-call times of the field evaluation and of one midpoint step for a
few grid sizes, then the wall time of a short full run under each backend
(the backend is fixed at import time, so those runs use subprocesses).
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from pinchflow import kernels
from pinchflow.geometry import AxisymGrid

RUN_SNIPPET = """
import time
from pinchflow.flow import FlowConfig, InitialProfile, StopConfig, run
cfg = FlowConfig(n_theta={n}, initial=InitialProfile.perturbed(1.0, 0.05, 2),
                 stop=StopConfig(t_end=0.05))
run(cfg)  # warm-up and JIT
t0 = time.perf_counter()
res = run(cfg)
print(time.perf_counter() - t0, res.steps)
"""


def per_call(fn, repeat):
    return min(timeit.repeat(fn, number=repeat, repeat=3)) / repeat


def kernel_table(repeat):
    print(f"{'n_theta':>8} {'kernel':>14} {'numpy [us]':>12} {'numba [us]':>12} {'speedup':>8}")
    for n in (64, 256, 1024):
        g = AxisymGrid(n)
        u = 1.0 + 0.05 * np.cos(2 * g.theta)
        args = (u, g.theta, g.d_theta, False, 1, 2.0)
        speed = kernels.np_flow_field(*args)[4]
        step_args = (u, speed, g.theta, g.d_theta, False, 1, 2.0, 1e-5)
        kernels.nb_flow_field(*args)
        kernels.nb_midpoint_step(*step_args)
        for name, a, b, xs in (
            ("flow_field", kernels.np_flow_field, kernels.nb_flow_field, args),
            ("midpoint_step", kernels.np_midpoint_step, kernels.nb_midpoint_step, step_args),
        ):
            ta = per_call(lambda: a(*xs), repeat)
            tb = per_call(lambda: b(*xs), repeat)
            print(f"{n:>8} {name:>14} {ta * 1e6:>12.2f} {tb * 1e6:>12.2f} {ta / tb:>8.1f}")


def run_table():
    print(f"\n{'n_theta':>8} {'backend':>8} {'wall [s]':>10} {'steps':>8}")
    for n in (64, 256):
        for flag, name in (("0", "numpy"), ("1", "numba")):
            env = dict(os.environ, PINCHFLOW_NUMBA=flag)
            out = subprocess.run([sys.executable, "-c", RUN_SNIPPET.format(n=n)], env=env,
                                 capture_output=True, text=True, check=True).stdout.split()
            print(f"{n:>8} {name:>8} {float(out[0]):>10.3f} {out[1]:>8}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=200)
    ap.add_argument("--skip-runs", action="store_true")
    args = ap.parse_args()
    kernel_table(args.repeat)
    if not args.skip_runs:
        run_table()


if __name__ == "__main__":
    main()
