"""Seeded Monte Carlo estimates of decoding failure and recovered fraction.

Trial ``i`` draws from ``SeedSequence(master, spawn_key=(i,))``, so a report
depends only on the inputs and the master seed, never on how trials are
split across workers.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .decoder import peel
from .degree_dist import DegreeDistribution
from .errors import ValidationError
from .sampler import CodeParameters, presence_probs, sample_fixed_count, sample_instance

MODES = ("poisson", "fixed_n")
HIST_BINS = 100


def trial_seed(master: int, i: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(master, spawn_key=(i,))


def default_jobs() -> int:
    env = os.environ.get("LT_ANALYZER_JOBS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _run_chunk(args):
    dist, params, master, lo, hi, mode, want_traj = args
    decoded = np.empty(hi - lo, dtype=np.int64)
    traj_sum = np.zeros(params.k + 1, dtype=np.int64) if want_traj else None
    for i in range(lo, hi):
        seed = trial_seed(master, i)
        if mode == "poisson":
            inst = sample_instance(dist, params, seed)
        else:
            inst = sample_fixed_count(dist, params.k, int(round(params.n)), seed)
        res = peel(inst)
        decoded[i - lo] = res.n_decoded
        if want_traj:
            # traj[j] is X_u at u = k - j; stopped runs stay at zero
            traj_sum[: len(res.ripple_trajectory)] += res.ripple_trajectory
    return decoded, traj_sum


def _run_trials(dist, params, trials, seed, mode, jobs, want_traj):
    if trials < 1:
        raise ValidationError("trials must be at least 1")
    if mode not in MODES:
        raise ValidationError(f"mode must be one of {MODES}, got {mode!r}")
    if mode == "poisson":
        presence_probs(dist, params)  # surface parameter errors before forking
    elif dist.D > params.k:
        raise ValidationError(f"distribution degree {dist.D} exceeds k={params.k}")
    jobs = default_jobs() if jobs is None else max(1, int(jobs))
    jobs = min(jobs, trials)
    bounds = np.linspace(0, trials, jobs + 1).astype(int)
    chunks = [
        (dist, params, seed, int(lo), int(hi), mode, want_traj)
        for lo, hi in zip(bounds[:-1], bounds[1:])
        if hi > lo
    ]
    if jobs == 1:
        parts = [_run_chunk(c) for c in chunks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_run_chunk, chunks))
    decoded = np.concatenate([p[0] for p in parts])
    traj = None
    if want_traj:
        traj = np.zeros(params.k + 1, dtype=np.int64)
        for p in parts:
            traj += p[1]
    return decoded, traj


@dataclass(frozen=True, eq=False)
class SimulationReport:
    k: int
    n: float
    mode: str
    seed: int
    trials: int
    failures: int
    decoded_fraction_mean: float
    decoded_fraction_stddev: float
    decoded_counts: np.ndarray = field(repr=False)

    @property
    def p_hat(self) -> float:
        return self.failures / self.trials

    @property
    def ci_halfwidth(self) -> float:
        p = self.p_hat
        return 3.0 * math.sqrt(p * (1.0 - p) / self.trials)

    @property
    def ci_degenerate(self) -> bool:
        return self.ci_halfwidth == 0.0

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "n": self.n,
            "mode": self.mode,
            "seed": self.seed,
            "trials": self.trials,
            "failures": self.failures,
            "p_hat": self.p_hat,
            "ci_halfwidth": self.ci_halfwidth,
            "ci_degenerate": self.ci_degenerate,
            "decoded_fraction_mean": self.decoded_fraction_mean,
            "decoded_fraction_stddev": self.decoded_fraction_stddev,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _fraction_stats(decoded: np.ndarray, k: int) -> tuple[float, float]:
    frac = decoded / k
    mean = math.fsum(frac) / len(frac)
    var = math.fsum((frac - mean) ** 2) / len(frac)
    return mean, math.sqrt(var)


def estimate_failure(
    dist: DegreeDistribution,
    params: CodeParameters,
    trials: int,
    seed: int,
    mode: str = "poisson",
    jobs: int | None = 1,
) -> SimulationReport:
    """Empirical failure rate of the peeling decoder.

    ``poisson`` mode samples the Poisson model; ``fixed_n`` draws exactly
    ``round(n)`` symbols with i.i.d. degrees and allows duplicate symbols.
    A trial fails when any input stays undecoded.
    """
    decoded, _ = _run_trials(dist, params, trials, seed, mode, jobs, False)
    mean, std = _fraction_stats(decoded, params.k)
    failures = int(np.count_nonzero(decoded < params.k))
    return SimulationReport(params.k, params.n, mode, seed, trials, failures, mean, std, decoded)


@dataclass(frozen=True, eq=False)
class FractionProfile:
    k: int
    trials: int
    seed: int
    histogram: np.ndarray
    bin_edges: np.ndarray
    mean_trajectory: np.ndarray
    mean: float
    stddev: float

    def histogram_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["bin_lo", "bin_hi", "count"])
        for lo, hi, c in zip(self.bin_edges[:-1], self.bin_edges[1:], self.histogram):
            w.writerow([repr(float(lo)), repr(float(hi)), int(c)])
        return buf.getvalue()

    def trajectory_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["u", "mean_X_u"])
        for j, x in enumerate(self.mean_trajectory):
            w.writerow([self.k - j, repr(float(x))])
        return buf.getvalue()


def decoded_fraction_profile(
    dist: DegreeDistribution,
    params: CodeParameters,
    trials: int,
    seed: int,
    jobs: int | None = 1,
    mode: str = "poisson",
) -> FractionProfile:
    """Histogram of decoded fractions (100 bins on [0, 1]) and the mean ripple
    trajectory ``mean X_u`` for ``u = k..1``."""
    return simulate(dist, params, trials, seed, mode=mode, jobs=jobs)[1]


def simulate(
    dist: DegreeDistribution,
    params: CodeParameters,
    trials: int,
    seed: int,
    mode: str = "poisson",
    jobs: int | None = 1,
) -> tuple[SimulationReport, FractionProfile]:
    """One pass of trials yielding both the failure report and the profile."""
    decoded, traj = _run_trials(dist, params, trials, seed, mode, jobs, True)
    k = params.k
    edges = np.linspace(0.0, 1.0, HIST_BINS + 1)
    # integer binning; fraction 1 falls in the top bin
    bins = np.minimum(decoded * HIST_BINS // k, HIST_BINS - 1)
    hist = np.bincount(bins, minlength=HIST_BINS)
    mean, std = _fraction_stats(decoded, k)
    failures = int(np.count_nonzero(decoded < k))
    report = SimulationReport(k, params.n, mode, seed, trials, failures, mean, std, decoded)
    return report, FractionProfile(k, trials, seed, hist, edges, traj[:k] / trials, mean, std)
