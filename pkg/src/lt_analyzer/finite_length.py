"""Exact decoding-failure probability under the Poisson model.

The ripple size ``X_u`` (symbols decodable when ``u`` remain undecoded) is a
Markov chain: ``X_{u-1} = X_u - 1 + Y_u`` with ``Y_u ~ B(u - X_u, q_u)``.
Its law ``Q(u, r) = Pr[X_u = r]`` is propagated from ``u = k`` down to
``u = 1``; the failure probability is ``Q(1, 0)``.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from . import kernels
from .degree_dist import DegreeDistribution
from .errors import ValidationError
from .sampler import CodeParameters, from_neighbor_sets, presence_prob, presence_probs

NAIVE_MAX_K = 2000
# measured: the compiled naive loop beats the polynomial engine up to its own limit
AUTO_CROSSOVER = NAIVE_MAX_K
ROW_SUM_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class QVector:
    u: int
    probs: np.ndarray


@dataclass(frozen=True, eq=False)
class QTransferParams:
    """``q[u]`` for ``u = 1..k`` (index 0 unused) and ``log1m_q[u] = ln(1 - q_u)``."""

    q: np.ndarray
    log1m_q: np.ndarray
    f_table: dict[int, np.ndarray] | None = None


@dataclass(frozen=True, eq=False)
class FiniteLengthResult:
    p_error: float
    engine: str
    row_sum_max_dev: float
    full_table: list[QVector] | None = None

    def to_dict(self) -> dict:
        return {
            "p_error": self.p_error,
            "engine": self.engine,
            "row_sum_max_dev": self.row_sum_max_dev,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def table_csv(self) -> str:
        if self.full_table is None:
            raise ValueError("result was computed without full_table")
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["u", "r", "Q"])
        for vec in self.full_table:
            for r, val in enumerate(vec.probs):
                w.writerow([vec.u, r, repr(float(val))])
        return buf.getvalue()


def precompute_q(
    dist: DegreeDistribution, params: CodeParameters, with_table: bool = False
) -> QTransferParams:
    """Join probabilities ``q_u = 1 - prod_d (1 - p_d)^C(k-u, d-2)``.

    Each factor ``ln f(u, d)`` starts at ``ln(1 - p_d)`` for
    ``u = k - d + 2`` and is carried to smaller ``u`` by the ratio
    ``(k-u+1)/(k-u-d+3)`` of consecutive binomial exponents.
    """
    k = params.k
    probs = presence_probs(dist, params)
    log1m_q = np.zeros(k + 1)
    table = {} if with_table else None
    for d, p in zip(dist.degrees, probs):
        if d < 2 or p == 0.0:
            continue
        u0 = k - d + 2
        base = math.log1p(-p) if p < 1.0 else -math.inf
        v = np.arange(u0, 1, -1, dtype=float)  # transition v -> v - 1
        ratios = (k - v + 1.0) / (k - v - d + 3.0)
        lf = np.empty(u0)
        lf[0] = base
        if base == -math.inf:
            lf[1:] = -math.inf
        else:
            lf[1:] = base * np.cumprod(ratios)
        lf = lf[::-1]  # now indexed u = 1..u0
        log1m_q[1 : u0 + 1] += lf
        if table is not None:
            table[d] = lf
    log1m_q[0] = 0.0
    q = -np.expm1(log1m_q)
    q[0] = 0.0
    return QTransferParams(q=q, log1m_q=log1m_q, f_table=table)


def initial_row(k: int, p1: float) -> np.ndarray:
    """``Q(k, r)``: binomial ``B(k, p_1)`` in log domain."""
    r = np.arange(k + 1)
    if p1 <= 0.0:
        row = np.zeros(k + 1)
        row[0] = 1.0
        return row
    if p1 >= 1.0:
        row = np.zeros(k + 1)
        row[k] = 1.0
        return row
    lp = gammaln(k + 1) - gammaln(r + 1) - gammaln(k - r + 1) + r * math.log(p1) + (k - r) * math.log1p(-p1)
    return np.exp(lp)


def _degree_one_prob(dist: DegreeDistribution, params: CodeParameters) -> float:
    return presence_prob(1, params, dist) if dist.weight(1) > 0 else 0.0


def dp_naive(
    dist: DegreeDistribution,
    params: CodeParameters,
    full_table: bool = False,
    max_k: int = NAIVE_MAX_K,
) -> FiniteLengthResult:
    """Direct O(k^3) evaluation of the ripple recursion.

    Only two rows are held unless ``full_table`` is set.
    """
    k = params.k
    if k > max_k:
        raise ValidationError(f"k={k} exceeds the naive engine limit {max_k}")
    qp = precompute_q(dist, params)
    row = initial_row(k, _degree_one_prob(dist, params))
    log_fact = gammaln(np.arange(k + 1) + 1.0)
    table = [QVector(k, row)] if full_table else None
    dev = abs(math.fsum(row) - 1.0)
    for u in range(k, 1, -1):
        row = kernels.transfer_row(row, float(qp.q[u]), log_fact)
        dev = max(dev, abs(math.fsum(row) - 1.0))
        if table is not None:
            table.append(QVector(u - 1, row))
    return FiniteLengthResult(float(row[0]), "naive", dev, table)


def brute_force_exact(dist: DegreeDistribution, params: CodeParameters, max_k: int = 4) -> float:
    """Failure probability by enumerating every received-subset configuration.

    Each subset ``S`` with ``Omega_|S| > 0`` is present independently with
    probability ``p_|S|``; each configuration is peeled.
    """
    from .decoder import peel

    k = params.k
    if k > max_k:
        raise ValidationError(f"brute force is limited to k <= {max_k}, got {k}")
    subsets = []
    probs = []
    for d in dist.degrees:
        p = presence_prob(d, params, dist)
        for s in itertools.combinations(range(k), d):
            subsets.append(s)
            probs.append(p)
    fail = []
    for present in itertools.product((False, True), repeat=len(subsets)):
        weight = 1.0
        for bit, p in zip(present, probs):
            weight *= p if bit else 1.0 - p
        if weight == 0.0:
            continue
        inst = from_neighbor_sets(params, [s for s, b in zip(subsets, present) if b])
        if not peel(inst).success:
            fail.append(weight)
    return math.fsum(fail)


def failure_probability(
    dist: DegreeDistribution,
    params: CodeParameters,
    engine: str = "auto",
    precision_bits: int = 128,
    full_table: bool = False,
) -> FiniteLengthResult:
    """Dispatch to an engine; ``auto`` uses naive up to ``AUTO_CROSSOVER`` (k=2000) and poly above."""
    if engine == "auto":
        engine = "naive" if params.k <= AUTO_CROSSOVER else "poly"
    if engine == "naive":
        return dp_naive(dist, params, full_table=full_table)
    if engine == "poly":
        from .poly import dp_poly

        return dp_poly(dist, params, precision_bits=precision_bits, full_table=full_table)
    raise ValidationError(f"unknown engine {engine!r}")
