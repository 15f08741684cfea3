"""Time the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Each kernel is run once untimed (JIT compilation), then timed; results of
both backends are compared before timing is reported.
"""

import argparse
import time

import numpy as np

from superspecial import _kernels as K
from superspecial import quaternion_core as qc
from superspecial.quadratic_arith import split_primes


def _time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def _same(a, b):
    if isinstance(a, float):
        return abs(a - b) < 1e-12
    return np.array_equal(np.asarray(a), np.asarray(b))


def cases():
    order = qc.build_maximal_order()
    tr, q = qc.norm_form(order)
    ls = np.array(split_primes(20000), dtype=np.int64)
    rng = np.random.default_rng(7)
    pts = rng.random((4000, 2))
    return {
        "embedding_search (D=-219, H=32)": lambda nb: K.embedding_search(tr, q, 1, 55, 32, use_numba=nb),
        "class_number_table (|D| <= 20000)": lambda nb: K.class_number_table(20000, use_numba=nb),
        "norm_equation_search (m=6)": lambda nb: K.norm_equation_search(ls, 6, 400, use_numba=nb),
        "star_discrepancy (4000 pts)": lambda nb: K.star_discrepancy(pts, 64, use_numba=nb),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not K.numba_enabled():
        print(f"numba disabled ({K.DISABLE_ENV} set or numba missing); timing numpy only")
    print(f"{'kernel':<40} {'numpy s':>10} {'numba s':>10} {'speedup':>8}")
    for name, fn in cases().items():
        t_np, out_np = _time(lambda: fn(False), args.repeat)
        if K.numba_enabled():
            fn(True)  # compile
            t_nb, out_nb = _time(lambda: fn(True), args.repeat)
            assert _same(out_np, out_nb), f"backends disagree on {name}"
            print(f"{name:<40} {t_np:>10.4f} {t_nb:>10.4f} {t_np / t_nb:>7.1f}x")
        else:
            print(f"{name:<40} {t_np:>10.4f} {'-':>10} {'-':>8}")


if __name__ == "__main__":
    main()
