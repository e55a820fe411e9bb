"""Compare the compiled kernels against the pure-Python fallback.

Run:  python benchmarks/bench_backends.py [--limit N]

Times the hot paths on identical inputs and checks the outputs agree
exactly, so the table doubles as an equivalence smoke test.
"""
import argparse
import math
import time

import numpy as np

from lamcycle import kernels


def timed(fn, repeat: int = 3):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench(limit: int) -> None:
    backends = {}
    for name in ("python", "cython"):
        try:
            backends[name] = kernels.get(name)
        except ImportError:
            print(f"{name}: not built, skipping")
    if not backends:
        raise SystemExit("no backend importable")

    any_mod = next(iter(backends.values()))
    base = any_mod.sieve_primes(int(math.isqrt(limit)) + 1)
    lo, hi = limit - (1 << 18), limit
    qs = np.array([2, 3, 5, 7], dtype=np.int64)
    qlogs = np.log(qs.astype(np.float64))

    def case_table(mod):
        t, out = timed(lambda: mod.pminus1_table(limit))
        return t, int(out.primes.sum())

    def case_factor_range(mod):
        t, out = timed(lambda: mod.factor_range(lo, hi, base))
        return t, int(out[1].sum())

    def case_sweep_segment(mod):
        scratch = mod.make_sweep_scratch(mod.pminus1_table(limit), qs, qlogs)
        t, out = timed(lambda: mod.sweep_segment(lo, hi, scratch, base))
        return t, int(out[0].sum())

    def case_brute_census(mod):
        t, out = timed(lambda: mod.brute_census(2, 500_000))
        return t, int(out[2].sum())

    cases = [
        (f"pminus1_table({limit})", case_table),
        (f"factor_range[{hi - lo} wide]", case_factor_range),
        (f"sweep_segment[{hi - lo} wide]", case_sweep_segment),
        ("brute_census(2, 500000)", case_brute_census),
    ]

    width = max(len(label) for label, _ in cases)
    print(f"{'operation':<{width}}  backend  seconds")
    for label, runner in cases:
        digests, times = {}, {}
        for name, mod in backends.items():
            times[name], digests[name] = runner(mod)
        if len(set(digests.values())) != 1:
            raise SystemExit(f"{label}: backends disagree: {digests}")
        for name, t in times.items():
            rel = ""
            if name != "python" and "python" in times:
                rel = f"  ({times['python'] / t:.1f}x vs python)"
            print(f"{label:<{width}}  {name:<7}  {t:7.3f}{rel}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--limit", type=int, default=2_000_000)
    args = ap.parse_args()
    bench(args.limit)
