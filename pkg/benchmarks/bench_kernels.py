"""Time the numba kernels against the pure-numpy fallbacks.

Run: python benchmarks/bench_kernels.py
The same comparison is reachable end to end by setting PHYNDN_NO_NUMBA=1 and
rerunning any experiment; this script isolates the kernel cost.
"""

import time

import numpy as np

from phyndn import _accel

TRIALS = 100_000
N_S = 400
REPS = 5


def timeit(fn, *args):
    fn(*args)  # warm up (includes jit compilation on the numba path)
    best = float("inf")
    for _ in range(REPS):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    rng = np.random.default_rng(0)
    y = rng.normal(0.0, 1.0, size=(20_000, N_S))

    print(f"numba available/selected: {_accel.USING_NUMBA}")
    print(f"block shape: {y.shape}\n")

    rows = []
    if _accel.USING_NUMBA:
        rows.append(("row_mean_ss  numba", timeit(_accel._row_mean_ss_njit, y)))
    rows.append(("row_mean_ss  numpy", timeit(_accel._row_mean_ss_numpy, y)))
    if _accel.USING_NUMBA:
        rows.append(("glrt_rows    numba", timeit(_accel._glrt_from_rows_njit, y)))
    rows.append(("glrt_rows    numpy", timeit(_accel._glrt_from_rows_numpy, y)))

    for name, seconds in rows:
        print(f"{name}: {seconds * 1e3:8.2f} ms per block")

    # end to end: RNG draws included (both backends consume identical draws)
    def end_to_end():
        r = np.random.default_rng(1)
        return _accel.mc_glrt_stats(r, TRIALS, N_S, 0.0, 1.0)

    seconds = timeit(end_to_end)
    print(f"\nmc_glrt_stats ({TRIALS} trials x {N_S}): {seconds:.2f} s "
          f"({'numba' if _accel.USING_NUMBA else 'numpy'} backend)")


if __name__ == "__main__":
    main()
