"""Timing of the compiled core against the numpy fallback.

Run:  python benchmarks/bench_core.py [--repeat N]

Part 1 times the hot functions from both backends in-process.  Part 2 times an
end-to-end kernel grid in two child processes, one with GINPROD_PURE=1.
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from ginprod import _core_py

try:
    from ginprod import _core
except ImportError:
    _core = None

END_TO_END = """
import time, numpy as np
from ginprod import BACKEND
from ginprod.process import ProcessSpec
from ginprod.kernels import make_kernel
K = make_kernel(ProcessSpec.build(3, 3, [1, 0, 2]), "double")
xs = np.geomspace(0.05, 20, 24)
t = time.perf_counter()
for r in (1, 2, 3):
    K.grid(r, xs, r, xs)
print(BACKEND, time.perf_counter() - t)
"""


def workloads(rng):
    z = rng.normal(size=20000) * 30 + 1j * rng.normal(size=20000) * 30
    u = -0.5 + 1j * np.linspace(-40, 40, 1500)
    t = 3 + 4 * np.exp(1j * np.linspace(0, 2 * np.pi, 1200))
    a = rng.normal(size=1500) + 0j
    b = rng.normal(size=(1200, 16)) + 0j
    bv = rng.normal(size=1200) + 0j
    return {
        "loggamma (20k complex)": lambda m: m.loggamma(z),
        "cauchy_matrix_apply (1500x1200x16)": lambda m: m.cauchy_matrix_apply(u, t, b),
        "cauchy_bilinear (1500x1200)": lambda m: m.cauchy_bilinear(a, u, bv, t),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(1)
    print(f"{'function':40s} {'numpy [ms]':>12s} {'compiled [ms]':>14s} {'speedup':>8s}")
    for name, fn in workloads(rng).items():
        tp = min(timeit.repeat(lambda: fn(_core_py), number=1, repeat=args.repeat)) * 1e3
        if _core is None:
            print(f"{name:40s} {tp:12.2f} {'n/a':>14s}")
            continue
        tc = min(timeit.repeat(lambda: fn(_core), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:40s} {tp:12.2f} {tc:14.2f} {tp / tc:8.1f}")
    print("\nend-to-end double-contour kernel grid (n=3, m=3, 3 x 24x24):")
    for pure in ("0", "1"):
        env = dict(os.environ, GINPROD_PURE=pure)
        out = subprocess.run([sys.executable, "-c", END_TO_END], env=env, capture_output=True,
                             text=True, check=True).stdout.split()
        print(f"  backend={out[0]:9s} {float(out[1]):8.3f} s")


if __name__ == "__main__":
    main()
