"""Compiled kernels against the pure-Python fallback, plus the two DP engines.

    python3 benchmarks/bench_kernels.py [--quick]
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np
from scipy.special import gammaln

from lt_analyzer import _fallback
from lt_analyzer.degree_dist import soliton_ideal, soliton_robust
from lt_analyzer.finite_length import dp_naive
from lt_analyzer.poly import dp_poly
from lt_analyzer.sampler import CodeParameters, sample_instance

try:
    from lt_analyzer import _kernels
except ImportError:  # extension not built
    _kernels = None


def best(fn, number=1, repeat=3) -> float:
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def row(name, compiled, fallback):
    ratio = f"{fallback / compiled:8.1f}x" if compiled else "       -"
    c = f"{compiled * 1e3:10.3f}" if compiled else "         -"
    print(f"{name:<34}{c}{fallback * 1e3:12.3f}{ratio}")


def bench_peel(ks):
    for k in ks:
        inst = sample_instance(soliton_robust(k, 0.05, 0.5), CodeParameters(k, 1.1 * k), 1)
        args = (k, inst.indptr, inst.indices)
        fb = best(lambda: _fallback.peel_csr(*args))
        cp = best(lambda: _kernels.peel_csr(*args), number=10) if _kernels else None
        row(f"peel k={k} ({inst.num_edges} edges)", cp, fb)


def bench_transfer(us):
    for u in us:
        r = np.random.default_rng(0).random(u + 1)
        r /= r.sum()
        lf = gammaln(np.arange(u + 1) + 1.0)
        fb = best(lambda: _fallback.transfer_row(r, 0.01, lf))
        cp = best(lambda: _kernels.transfer_row(r, 0.01, lf), number=5) if _kernels else None
        row(f"transfer_row u={u}", cp, fb)


def bench_subsets(ks):
    for k in ks:
        degs = np.random.default_rng(0).integers(2, 12, size=k).astype(np.int64)
        u = np.random.default_rng(1).random(int(degs.sum()))
        fb = best(lambda: _fallback.sample_subsets(k, degs, u))
        cp = best(lambda: _kernels.sample_subsets(k, degs, u), number=10) if _kernels else None
        row(f"sample_subsets {k} rows", cp, fb)


def bench_engines(ks):
    print(f"\n{'finite-length engine':<34}{'naive ms':>10}{'poly ms':>12}")
    for k in ks:
        dist, p = soliton_ideal(k), CodeParameters(k, 1.1 * k)
        a = best(lambda: dp_naive(dist, p), repeat=1)
        b = best(lambda: dp_poly(dist, p), repeat=1)
        print(f"{'ideal soliton k=' + str(k):<34}{a * 1e3:10.1f}{b * 1e3:12.1f}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--quick", action="store_true", help="smaller sizes")
    args = ap.parse_args()
    print(f"{'kernel':<34}{'compiled ms':>10}{'python ms':>12}{'speedup':>9}")
    if args.quick:
        bench_peel([1000])
        bench_transfer([200])
        bench_subsets([1000])
        bench_engines([100, 300])
    else:
        bench_peel([1000, 10_000])
        bench_transfer([200, 1000])
        bench_subsets([1000, 10_000])
        bench_engines([100, 300, 500, 1000])


if __name__ == "__main__":
    main()
