"""Compare the numba and pure-numpy Walsh-Hadamard kernels.

    python benchmarks/bench_fwht.py [--reps 5]

Also times one full lensless cell under each backend by re-running this
interpreter with SNRLAB_DISABLE_NUMBA set.
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from snrlab import _kernels


def best_of(fn, reps):
    best = float("inf")
    for _ in range(reps):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def kernel_table(reps):
    print(f"{'n':>9} {'batch':>6} {'numpy ms':>10} {'numba ms':>10} {'speedup':>8}  identical")
    rng = np.random.default_rng(0)
    for k, batch in [(8, 256), (12, 64), (16, 16), (20, 2)]:
        n = 2**k
        base = rng.normal(size=(batch, n))
        a, b = base.copy(), base.copy()
        _kernels.fwht_rows_numba(a[:1].copy())  # compile
        t_np = best_of(lambda: _kernels.fwht_rows_numpy(base.copy()), reps)
        t_nb = best_of(lambda: _kernels.fwht_rows_numba(base.copy()), reps)
        same = np.array_equal(_kernels.fwht_rows_numpy(a), _kernels.fwht_rows_numba(b))
        print(f"{n:>9} {batch:>6} {t_np * 1e3:>10.2f} {t_nb * 1e3:>10.2f} {t_np / t_nb:>8.2f}  {same}")


CELL = (
    "import time; from snrlab import harness, _kernels;"
    "cfg = harness.SweepConfig(arch=('lci',), trials=20, scene='flat');"
    "harness.simulate_cell(cfg, 'lci', 16);"
    "t = time.perf_counter(); harness.simulate_cell(cfg, 'lci', 2**18);"
    "print(_kernels.backend(), round(time.perf_counter() - t, 3))"
)


def cell_table():
    for flag in ("0", "1"):
        env = dict(os.environ, SNRLAB_DISABLE_NUMBA=flag)
        out = subprocess.run([sys.executable, "-c", CELL], env=env, capture_output=True, text=True, check=True)
        backend, secs = out.stdout.split()
        print(f"lensless cell n=2^18, 20 trials, flat scene: {backend:>5} {secs} s")


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--reps", type=int, default=5)
    args = p.parse_args()
    if not _kernels.HAVE_NUMBA:
        sys.exit("numba is not installed; nothing to compare")
    kernel_table(args.reps)
    cell_table()


if __name__ == "__main__":
    main()
