"""Compare the compiled TBT kernels against the numpy fallback.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 20] [--sizes 32x3,32x5,64x3]

Prints the median time per call for each kernel and backend, the speed-up and
the max abs difference between the two outputs.
"""

from __future__ import annotations

import argparse
import statistics
import sys
import timeit

import numpy as np

from nestchan import _kernels_py as py
from nestchan.geometry import nested_array

try:
    from nestchan import _kernels as cy
except ImportError:
    cy = None


def _time(fn, repeat):
    fn()  # warm caches (index maps on the numpy side)
    runs = timeit.repeat(fn, number=1, repeat=repeat)
    return statistics.median(runs), statistics.pstdev(runs)


def bench(N, L, repeat, rng):
    cols = nested_array(N, 11 if N >= 16 else max(2, N // 2)).zero_based
    grid = rng.standard_normal((2 * L - 1, 2 * N - 1)) + 1j * rng.standard_normal((2 * L - 1, 2 * N - 1))
    full = rng.standard_normal((N * L, N * L)) + 1j * rng.standard_normal((N * L, N * L))
    ml = cols.size * L
    sel = rng.standard_normal((ml, ml)) + 1j * rng.standard_normal((ml, ml))
    cases = {
        "materialize": ((grid, N, L), {}),
        "class_sum": ((full, N, L), {}),
        "selected_materialize": ((grid, cols, N, L), {}),
        "selected_class_sum": ((sel, cols, N, L), {}),
    }
    rows = []
    for name, (args, _) in cases.items():
        f_py = getattr(py, name)
        t_py, s_py = _time(lambda: f_py(*args), repeat)
        if cy is None:
            rows.append((name, t_py, s_py, None, None, None))
            continue
        f_cy = getattr(cy, name)
        t_cy, s_cy = _time(lambda: f_cy(*args), repeat)
        diff = float(np.max(np.abs(np.asarray(f_py(*args)) - np.asarray(f_cy(*args)))))
        rows.append((name, t_py, s_py, t_cy, s_cy, diff))
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--sizes", default="32x3,32x5,64x3")
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args(argv)
    rng = np.random.default_rng(a.seed)
    if cy is None:
        print("compiled extension not available; timing the numpy fallback only", file=sys.stderr)
    print(f"{'N x L':>7} {'kernel':>22} {'numpy [us]':>14} {'cython [us]':>14} {'speed-up':>9} {'max diff':>9}")
    for spec in a.sizes.split(","):
        N, L = (int(v) for v in spec.lower().split("x"))
        for name, t_py, s_py, t_cy, s_cy, diff in bench(N, L, a.repeat, rng):
            py_s = f"{t_py * 1e6:8.1f}+-{s_py * 1e6:4.1f}"
            if t_cy is None:
                print(f"{spec:>7} {name:>22} {py_s:>14}")
                continue
            cy_s = f"{t_cy * 1e6:8.1f}+-{s_cy * 1e6:4.1f}"
            print(f"{spec:>7} {name:>22} {py_s:>14} {cy_s:>14} {t_py / t_cy:9.2f} {diff:9.1e}")


if __name__ == "__main__":
    main()
