"""Acceptance suite: ten end-to-end criteria, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v``; the summary lines are
printed at the end of the session (and inline with ``-s``). Running the
file directly also works: ``python3 tests/test_acceptance.py``.
"""

from __future__ import annotations

import math
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from lt_analyzer.asymptotic import beta_series, collapse_fraction
from lt_analyzer.bounds import default_window, failure_sandwich, tail_bounds
from lt_analyzer.degree_dist import soliton_ideal, soliton_robust, validate
from lt_analyzer.finite_length import brute_force_exact, dp_naive
from lt_analyzer.montecarlo import estimate_failure
from lt_analyzer.poly import dp_poly
from lt_analyzer.sampler import CodeParameters, make_rng, sample_counts

sys.path.insert(0, str(Path(__file__).parent))
import oracles  # noqa: E402

RESULTS: dict[int, tuple[bool, str]] = {}


def report(num: int, title: str, ok: bool, detail: str) -> None:
    RESULTS[num] = (ok, f"{title}: {detail}")
    print(f"\n{'PASS' if ok else 'FAIL'} criterion {num:>2} | {title}: {detail}")
    assert ok, detail


# ---- configurations shared by several criteria ----------------------------

EXACT_CASES = [  # (k, weights, n/k)
    (2, [(1, 1.0)], 0.5),
    (3, [(1, 1.0)], 1.0),
    (2, [(1, 0.5), (2, 0.5)], 0.5),
    (2, [(1, 0.5), (2, 0.5)], 1.0),
    (3, [(1, 0.5), (2, 0.5)], 1.0),
    (4, [(1, 0.3), (2, 0.7)], 1.5),
    (3, [(1, 0.3), (2, 0.5), (3, 0.2)], 1.5),
    (4, [(1, 0.25), (2, 0.5), (3, 0.25)], 0.5),
    (4, [(1, 0.3), (2, 0.4), (3, 0.3)], 1.0),
]

MIX1 = [(1, 0.1), (2, 0.5), (3, 0.4)]
MIX2 = [(1, 0.05), (2, 0.5), (3, 0.15), (4, 0.3)]
SIM_CASES = [  # (family, k, n/k)
    ("ideal", 10, 1.2), ("ideal", 30, 1.5), ("ideal", 60, 2.0), ("ideal", 100, 1.2),
    ("ideal", 100, 2.5), ("robust", 10, 1.3), ("robust", 25, 1.5), ("robust", 50, 1.3),
    ("robust", 80, 1.6), ("robust", 100, 1.3), ("robust", 100, 1.8), ("mix1", 10, 1.0),
    ("mix1", 20, 1.4), ("mix1", 40, 2.0), ("mix1", 70, 2.5), ("mix2", 15, 1.5),
    ("mix2", 35, 1.2), ("mix2", 50, 2.0), ("mix2", 90, 1.5), ("mix2", 100, 2.2),
]
ENGINE_KS = [10, 50, 200, 500]


def family(name: str, k: int):
    if name == "ideal":
        return soliton_ideal(k)
    if name == "robust":
        return soliton_robust(k, 0.05, 0.5)
    return validate(MIX1 if name == "mix1" else MIX2)


def engine_dists(k):
    return [("ideal", soliton_ideal(k)), ("robust", soliton_robust(k, 0.05, 0.5))]


# ---- criteria --------------------------------------------------------------


def test_criterion_01_poisson_exactness():
    t0 = time.perf_counter()
    worst = 0.0
    for k, w, ratio in EXACT_CASES:
        dist, p = validate(w), CodeParameters(k, ratio * k)
        worst = max(worst, abs(dp_naive(dist, p).p_error - brute_force_exact(dist, p)))
    example = validate([(1, 0.5), (2, 0.5)]), CodeParameters(3, 3)
    ex_dp, ex_bf = dp_naive(*example).p_error, brute_force_exact(*example)
    elapsed = time.perf_counter() - t0
    ok = (
        worst <= 1e-9
        and abs(ex_dp - 0.40625) <= 1e-9
        and abs(ex_bf - 0.40625) <= 1e-9
        and len(EXACT_CASES) >= 6
        and elapsed < 10
    )
    report(1, "Poisson-model exactness", ok,
           f"{len(EXACT_CASES)} cases, max |dp - brute| = {worst:.2e}, "
           f"k=3 example dp={ex_dp!r} brute={ex_bf!r}, {elapsed:.1f}s")


def test_criterion_02_engine_equivalence():
    t0 = time.perf_counter()
    worst = 0.0
    for k in ENGINE_KS:
        for _, dist in engine_dists(k):
            p = CodeParameters(k, 1.1 * k)
            a, b = dp_naive(dist, p).p_error, dp_poly(dist, p).p_error
            worst = max(worst, abs(a - b) / max(abs(a), 1e-300))
    elapsed = time.perf_counter() - t0
    report(2, "engine equivalence", worst <= 1e-6 and elapsed < 120,
           f"max relative gap {worst:.2e} over k={ENGINE_KS} x (ideal, robust), {elapsed:.1f}s")


def test_criterion_03_dp_vs_simulation():
    t0 = time.perf_counter()
    trials = 10_000
    inside = 0
    misses = []
    for i, (name, k, ratio) in enumerate(SIM_CASES):
        dist, p = family(name, k), CodeParameters(k, ratio * k)
        exact = dp_naive(dist, p).p_error
        sigma = math.sqrt(exact * (1 - exact) / trials)
        p_hat = estimate_failure(dist, p, trials, seed=1000 + i).p_hat
        if abs(p_hat - exact) <= 3 * sigma:
            inside += 1
        else:
            misses.append(f"{name} k={k} n={ratio}k: {p_hat:.4f} vs {exact:.4f}")
    elapsed = time.perf_counter() - t0
    detail = f"{inside}/{len(SIM_CASES)} inside 3 sigma, {elapsed:.0f}s"
    if misses:
        detail += "; misses: " + "; ".join(misses)
    report(3, "DP vs simulation", inside >= 19 and elapsed < 300, detail)


def test_criterion_04_asymptotic_agreement():
    t0 = time.perf_counter()
    k = 10_000
    cases = [
        ("Omega=(0.1,0.9), delta=0", validate([(1, 0.1), (2, 0.9)]), 0.0),
        ("robust c=0.05 delta_rs=0.5, delta=0.1", soliton_robust(k, 0.05, 0.5), 0.1),
    ]
    ok, parts = True, []
    for label, dist, delta in cases:
        res = collapse_fraction(beta_series(dist, delta))
        rep = estimate_failure(dist, CodeParameters.from_overhead(k, delta), 100, seed=77)
        gap = abs(rep.decoded_fraction_mean - res.z_star)
        ok &= res.hypotheses_hold and gap <= 0.02
        parts.append(f"{label}: mean {rep.decoded_fraction_mean:.4f} vs z* {res.z_star:.6f}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 300
    report(4, "asymptotic agreement", ok, "; ".join(parts) + f", {elapsed:.0f}s")


def test_criterion_05_root_finder():
    series = beta_series(validate([(1, 0.1), (2, 0.9)]), 0.0)
    z = collapse_fraction(series).z_star
    F_z = float(series.F(z))
    lo, hi = oracles.first_negative(series.F, points=1_000_000)
    scan = 0.5 * (lo + hi)  # the scan's estimate: midpoint of its sign-change cell
    ok = abs(F_z) <= 1e-9 and abs(z - scan) <= 1e-6
    report(5, "root-finder contract", ok,
           f"z*={z!r}, F(z*)={F_z:.2e}, scan estimate {scan:.8f} (|gap| {abs(z - scan):.1e})")


def test_criterion_06_degree_one_closed_form():
    dist = validate([(1, 1.0)])
    worst = 0.0
    for k in (5, 20, 100):
        for n in (0.3 * k, 0.7 * k, 0.95 * k, float(k)):
            got = dp_naive(dist, CodeParameters(k, n)).p_error
            worst = max(worst, abs(got - (1.0 - (n / k) ** k)))
    report(6, "D=1 closed form", worst <= 1e-12, f"max error {worst:.2e}")


def test_criterion_07_count_tails():
    k, n, draws = 100, 110.0, 100_000
    dist, p = soliton_ideal(k), CodeParameters(k, n)
    rng = make_rng(2718)
    totals = np.fromiter((sample_counts(dist, p, rng).sum() for _ in range(draws)), dtype=np.int64, count=draws)
    ok, parts = True, []
    for delta_dev in (0.2 * n, 0.5 * n):
        tb = tail_bounds(n, delta_dev)
        for name, freq, bound in (
            ("upper", np.mean(totals >= n + delta_dev), tb.upper_tail),
            ("lower", np.mean(totals <= n - delta_dev), tb.lower_tail),
        ):
            slack = 3 * math.sqrt(bound * (1 - bound) / draws)
            ok &= freq <= bound + slack
            parts.append(f"D={delta_dev:g} {name} {freq:.5f} <= {bound:.5f}")
    report(7, "concentration coherence", ok, "; ".join(parts))


def test_criterion_08_sandwich():
    k, n, trials = 100, 110.0, 10_000
    n1, n2 = default_window(n)
    ok, parts = True, []
    for name in ("ideal", "robust"):
        dist = family(name, k)
        f1 = dp_naive(dist, CodeParameters(k, n1)).p_error
        f2 = dp_naive(dist, CodeParameters(k, n2)).p_error
        s = failure_sandwich(f1, f2, n, n1, n2)
        rep = estimate_failure(dist, CodeParameters(k, n), trials, seed=31, mode="fixed_n")
        sigma = math.sqrt(rep.p_hat * (1 - rep.p_hat) / trials)
        ok &= s.lower - 3 * sigma <= rep.p_hat <= s.upper + 3 * sigma
        parts.append(f"{name}: p_hat {rep.p_hat:.4f} in [{s.lower:.4f}, {s.upper:.4f}]")
    report(8, "sandwich coherence", ok, "; ".join(parts))


def test_criterion_09_row_normalization():
    devs = []
    for k, w, ratio in EXACT_CASES:
        devs.append(dp_naive(validate(w), CodeParameters(k, ratio * k)).row_sum_max_dev)
    for k in ENGINE_KS:
        for _, dist in engine_dists(k):
            devs.append(dp_naive(dist, CodeParameters(k, 1.1 * k)).row_sum_max_dev)
    for name, k, ratio in SIM_CASES:
        devs.append(dp_naive(family(name, k), CodeParameters(k, ratio * k)).row_sum_max_dev)
    worst = max(devs)
    report(9, "row normalization", worst <= 1e-9, f"{len(devs)} naive runs, max |row sum - 1| = {worst:.2e}")


def test_criterion_10_determinism(tmp_path):
    outs = []
    for jobs in (1, 2, 4):
        target = tmp_path / f"r{jobs}.json"
        subprocess.run(
            [sys.executable, "-m", "lt_analyzer", "simulate", "--dist", "ideal", "--k", "50",
             "--n", "60", "--trials", "2000", "--seed", "99", "--jobs", str(jobs),
             "--out", str(target)],
            check=True, capture_output=True,
        )
        outs.append(target.read_bytes())
    same = all(o == outs[0] for o in outs)
    report(10, "determinism across --jobs", same, f"jobs 1/2/4 reports identical: {same}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
