"""Compare the numba kernels with their numpy references, and a full step.

    python benchmarks/bench_kernels.py [--n 256] [--repeat 20]

Kernel timings call both implementations in one process. The step timing
runs a short simulation in two subprocesses, one with KSLOGISTIC_NUMBA=0.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from kslogistic import _accel

STEP_SCRIPT = """
import time
from kslogistic.harness import config, scenario
c = config.loads('params.chi_over_chi0 = 0.9\\ngrid.points = {n}\\ngrid.length = 2*pi*8\\n'
                 'step.dt = 0.02\\nrun.t_end = {t_end}\\n')
scenario.simulate(c)  # warm-up (JIT compile, plan caches)
t0 = time.perf_counter()
scenario.simulate(c)
print(time.perf_counter() - t0)
"""


def kernels(n, rng):
    shape = (n, n)
    spec = (n, n // 2 + 1)
    u = rng.uniform(-0.1, 2.0, shape)
    z = -rng.uniform(0, 50, spec)
    e, w = rng.random(spec), rng.random(spec)
    x = rng.standard_normal(spec) + 1j * rng.standard_normal(spec)
    m = rng.standard_normal(spec) + 1j * rng.standard_normal(spec)
    gx, gy = rng.standard_normal(shape), rng.standard_normal(shape)
    return {
        "phi12": (lambda: _accel.phi12(z), lambda: _accel.np_phi12(z)),
        "logistic_source": (lambda: _accel.logistic_source(u, 1.5, 1.0, 1.5),
                            lambda: _accel.np_logistic_source(u, 1.5, 1.0, 1.5)),
        "clip_negative": (lambda: _accel.clip_negative(u.copy()),
                          lambda: _accel.np_clip_negative(u.copy())),
        "etd_update": (lambda: _accel.etd_update(e, w, x, m),
                       lambda: _accel.np_etd_update(e, w, x, m)),
        "etd_correct": (lambda: _accel.etd_correct(x, w, m, x),
                        lambda: _accel.np_etd_correct(x, w, m, x)),
        "sup_abs_deviation": (lambda: _accel.sup_abs_deviation(u, 1.0),
                              lambda: _accel.np_sup_abs_deviation(u, 1.0)),
        "sup_euclidean": (lambda: _accel.sup_euclidean([gx, gy]),
                          lambda: _accel.np_sup_euclidean([gx, gy])),
    }


def step_time(n, t_end, numba):
    env = dict(os.environ, KSLOGISTIC_NUMBA="1" if numba else "0")
    out = subprocess.run([sys.executable, "-c", STEP_SCRIPT.format(n=n, t_end=t_end)],
                         env=env, capture_output=True, text=True, check=True)
    return float(out.stdout.strip().splitlines()[-1])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=256)
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--t-end", type=float, default=2.0)
    args = ap.parse_args()

    print(f"backend in this process: {_accel.backend()}  grid {args.n}x{args.n}")
    if not _accel.HAS_NUMBA:
        print("numba unavailable; kernel comparison skipped")
    else:
        print(f"{'kernel':<20}{'numba ms':>10}{'numpy ms':>10}{'speedup':>9}")
        for name, (fast, ref) in kernels(args.n, np.random.default_rng(0)).items():
            fast()  # compile
            tf = min(timeit.repeat(fast, number=1, repeat=args.repeat)) * 1e3
            tr = min(timeit.repeat(ref, number=1, repeat=args.repeat)) * 1e3
            print(f"{name:<20}{tf:>10.3f}{tr:>10.3f}{tr / tf:>8.2f}x")

    n_steps = round(args.t_end / 0.02)
    on = step_time(args.n, args.t_end, True)
    off = step_time(args.n, args.t_end, False)
    print(f"full run, {n_steps} ETD2RK steps: numba {on:.3f}s  numpy {off:.3f}s  "
          f"ratio {off / on:.2f}x (FFTs are shared and dominate)")


if __name__ == "__main__":
    main()
