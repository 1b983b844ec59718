"""Benchmark the compiled kernels against the pure-Python reference and
cross-check that both backends produce identical results.

Usage: python benchmarks/bench_kernels.py [--quick]
"""

import argparse
import time

import numpy as np

from rdlab._kernels import reference

try:
    from rdlab._kernels import _fast as fast
except ImportError:
    fast = None


def timeit(fn, *args, repeat=3):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return out, best


def bench(name, ref_fn, fast_fn, *args):
    ref_out, ref_t = timeit(ref_fn, *args)
    if fast_fn is None:
        print(f"{name:28s} reference {ref_t*1e3:9.2f} ms   (no extension)")
        return
    fast_out, fast_t = timeit(fast_fn, *args)
    assert ref_out == fast_out, f"{name}: backend mismatch"
    print(f"{name:28s} reference {ref_t*1e3:9.2f} ms   "
          f"compiled {fast_t*1e3:8.2f} ms   speedup {ref_t/fast_t:6.1f}x")


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--quick", action="store_true")
    args = parser.parse_args()
    r1_max = 8192 if args.quick else 65536
    n_events = 200_000 if args.quick else 2_000_000

    trc, trfm, trefw = 52_000, 350_000, 32_000_000_000
    bench("prfm_best(th=4)",
          reference.prfm_best, fast.prfm_best if fast else None,
          4, 1, r1_max, trc, trfm, trefw)
    bench("prac_best(nbor=4, D=7)",
          reference.prac_best, fast.prac_best if fast else None,
          4, 7, 1, r1_max, 1, trc, trfm, trefw, True)

    rng = np.random.default_rng(0)
    kinds = rng.integers(0, 3, size=n_events).astype(np.int8)
    keys = (rng.integers(0, 64, size=n_events) * 65536
            + rng.integers(0, 4096, size=n_events)).astype(np.int64)

    def ref_scan():
        return reference.oracle_scan(kinds, keys, 65536, 1000)[:3]

    def fast_scan():
        return fast.oracle_scan(kinds, keys, 65536, 1000)[:3]

    bench(f"oracle_scan({n_events})", lambda: ref_scan(),
          (lambda: fast_scan()) if fast else None)


if __name__ == "__main__":
    main()
