"""Poisson-model code instances: sampling, encoding and dump format.

Every d-subset of the ``k`` input symbols independently yields a received
output symbol with probability ``p_d = n * Omega_d / C(k, d)``. Received
neighbor sets are therefore always distinct.

Randomness comes from numpy's PCG64 seeded through ``SeedSequence``; one
generator per instance is consumed in a fixed order (counts for all
degrees, then the small degrees drawn by rank, then one batch of uniforms
for the rest), so an instance is a pure function of ``(dist, params, seed)``.
Both kernel backends turn that batch into the same subsets.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .degree_dist import DegreeDistribution
from . import kernels
from .errors import DuplicateExhaustion, ResultExceedsOne, ValidationError

EXACT_BINOMIAL_MAX = 2**20
PAYLOAD_WIDTH = 8
# C(k, d) is computed exactly below this log value (about 2**52)
_EXACT_LOG_COMB = 36.0
# odd multipliers for the row hash used to spot duplicate subsets
_HASH_MUL = np.uint64(0x9E3779B97F4A7C15)
_HASH_LEN = np.uint64(0xC2B2AE3D27D4EB4F)


def make_rng(seed=None) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(seed))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def log_comb(n: int, r: int) -> float:
    if r < 0 or r > n:
        return -math.inf
    return math.lgamma(n + 1) - math.lgamma(r + 1) - math.lgamma(n - r + 1)


@dataclass(frozen=True)
class CodeParameters:
    k: int
    n: float
    delta: float | None = None

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ValidationError(f"k must be a positive integer, got {self.k}")
        if not (math.isfinite(self.n) and self.n >= 0):
            raise ValidationError(f"n must be finite and non-negative, got {self.n}")

    @classmethod
    def from_overhead(cls, k: int, delta: float) -> CodeParameters:
        if delta < 0:
            raise ValidationError(f"overhead must be non-negative, got {delta}")
        return cls(k=k, n=(1.0 + delta) * k, delta=delta)


def _presence(d: int, w: float, k: int, n: float) -> float:
    if w == 0.0 or n == 0:
        return 0.0
    lc = log_comb(k, d)
    if lc < _EXACT_LOG_COMB:
        p = n * w / math.comb(k, d)
    else:
        p = math.exp(math.log(n) + math.log(w) - lc)
    if p > 1.0 + 1e-12:
        raise ResultExceedsOne(
            f"p_{d} = n*Omega_{d}/C({k},{d}) = {p:.6g} > 1; n is too large for this k"
        )
    return min(p, 1.0)


def presence_prob(d: int, params: CodeParameters, dist: DegreeDistribution) -> float:
    """Probability that a given d-subset was received, ``n Omega_d / C(k, d)``."""
    if d < 1 or d > params.k:
        raise ValidationError(f"degree {d} outside [1, {params.k}]")
    return _presence(d, dist.weight(d), params.k, params.n)


def presence_probs(dist: DegreeDistribution, params: CodeParameters) -> np.ndarray:
    """``p_d`` for every degree of the support, in support order."""
    return _plan(dist, params).probs


@dataclass(frozen=True, eq=False)
class _SamplingPlan:
    probs: np.ndarray
    exact: np.ndarray  # C(k, d) <= EXACT_BINOMIAL_MAX
    trials: np.ndarray  # C(k, d) for the exact degrees
    means: np.ndarray  # n * Omega_d for the Poisson degrees
    totals: tuple  # C(k, d) as int when representable, else None


@lru_cache(maxsize=64)
def _plan(dist: DegreeDistribution, params: CodeParameters) -> _SamplingPlan:
    k = params.k
    if dist.D > k:
        raise ValidationError(f"distribution degree {dist.D} exceeds k={k}")
    lcs = [log_comb(k, d) for d in dist.degrees]
    probs = np.array([_presence(d, w, k, params.n) for d, w in dist.items()])
    exact = np.array([lc <= math.log(EXACT_BINOMIAL_MAX) + 1e-9 for lc in lcs], dtype=bool)
    totals = tuple(math.comb(k, d) if lc < _EXACT_LOG_COMB else None for d, lc in zip(dist.degrees, lcs))
    trials = np.array([t for t, e in zip(totals, exact) if e], dtype=np.int64)
    means = params.n * dist.weights[~exact]
    return _SamplingPlan(probs, exact, trials, means, totals)


@dataclass(frozen=True)
class OutputSymbol:
    neighbors: tuple[int, ...]
    value: bytes | None = None


@dataclass(frozen=True, eq=False)
class CodeInstance:
    """Received output symbols in CSR layout.

    Symbol ``i`` has neighbors ``indices[indptr[i]:indptr[i+1]]`` (sorted).
    ``values`` is an optional ``(N, width)`` uint8 array of payloads.
    """

    params: CodeParameters
    indptr: np.ndarray
    indices: np.ndarray
    counts: dict[int, int] = field(default_factory=dict)
    values: np.ndarray | None = None

    @property
    def N(self) -> int:
        return len(self.indptr) - 1

    @property
    def k(self) -> int:
        return self.params.k

    @property
    def num_edges(self) -> int:
        return int(self.indptr[-1])

    def neighbors(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i] : self.indptr[i + 1]]

    @property
    def symbols(self) -> list[OutputSymbol]:
        out = []
        for i in range(self.N):
            value = None if self.values is None else self.values[i].tobytes()
            out.append(OutputSymbol(tuple(int(a) for a in self.neighbors(i)), value))
        return out

    def neighbor_sets(self) -> list[tuple[int, ...]]:
        return [tuple(int(a) for a in self.neighbors(i)) for i in range(self.N)]

    def to_jsonl(self) -> str:
        lines = []
        for sym in self.symbols:
            rec = {"neighbors": list(sym.neighbors)}
            rec["value"] = None if sym.value is None else sym.value.hex()
            lines.append(json.dumps(rec, separators=(",", ":")))
        return "".join(line + "\n" for line in lines)

    @classmethod
    def from_jsonl(cls, text: str, params: CodeParameters) -> CodeInstance:
        recs = [json.loads(line) for line in text.splitlines() if line.strip()]
        values = None
        if recs and all(r.get("value") is not None for r in recs):
            values = np.array(
                [np.frombuffer(bytes.fromhex(r["value"]), dtype=np.uint8) for r in recs]
            )
        return from_neighbor_sets(params, [r["neighbors"] for r in recs], values)


def from_neighbor_sets(
    params: CodeParameters,
    sets: Iterable[Sequence[int]],
    values: np.ndarray | None = None,
) -> CodeInstance:
    """Build an instance from explicit neighbor sets (tests, dumps, brute force)."""
    rows = [sorted(int(a) for a in s) for s in sets]
    counts: dict[int, int] = {}
    for row in rows:
        if not row:
            raise ValidationError("output symbol with no neighbors")
        if len(set(row)) != len(row):
            raise ValidationError(f"repeated neighbor in {row}")
        if row[0] < 0 or row[-1] >= params.k:
            raise ValidationError(f"neighbor index outside [0, {params.k}) in {row}")
        counts[len(row)] = counts.get(len(row), 0) + 1
    indptr = np.zeros(len(rows) + 1, dtype=np.int64)
    indptr[1:] = np.cumsum([len(r) for r in rows])
    indices = np.array([a for r in rows for a in r], dtype=np.int64)
    return CodeInstance(params, indptr, indices, dict(sorted(counts.items())), values)


@lru_cache(maxsize=256)
def _colex_tables(k: int, d: int) -> tuple[np.ndarray, ...]:
    # tables[i][c] = min(C(c, i), CAP) for c in 0..k-1, i = 1..d
    cap = np.int64(2**40)
    c = np.arange(k, dtype=np.int64)
    tables = [c.copy()]
    for i in range(2, d + 1):
        prev = np.concatenate(([0], tables[-1][:-1]))
        cur = np.where(prev >= cap, cap, prev * c // i)
        tables.append(np.minimum(cur, cap))
    return tuple(tables)


def unrank_subsets(ranks: np.ndarray, k: int, d: int) -> np.ndarray:
    """Colex-unrank combinations: row ``i`` is the ``ranks[i]``-th d-subset of range(k)."""
    ranks = np.asarray(ranks, dtype=np.int64).copy()
    out = np.empty((len(ranks), d), dtype=np.int64)
    tables = _colex_tables(k, d)
    for i in range(d, 0, -1):
        col = np.searchsorted(tables[i - 1], ranks, side="right") - 1
        out[:, i - 1] = col
        ranks -= tables[i - 1][col]
    return out


def _random_subsets(rng: np.random.Generator, k: int, degrees: np.ndarray) -> np.ndarray:
    """One uniform subset per entry of ``degrees``, flattened, rows sorted."""
    degrees = np.ascontiguousarray(degrees, dtype=np.int64)
    return kernels.sample_subsets(k, degrees, rng.random(int(degrees.sum())))


def _row_hashes(indptr: np.ndarray, indices: np.ndarray) -> np.ndarray:
    lens = np.diff(indptr)
    pos = np.arange(len(indices)) - np.repeat(indptr[:-1], lens)
    powers = np.cumprod(np.full(int(lens.max()), _HASH_MUL, dtype=np.uint64))
    terms = (indices.astype(np.uint64) + np.uint64(1)) * powers[pos]
    h = np.add.reduceat(terms, indptr[:-1])
    return h ^ (lens.astype(np.uint64) * np.uint64(_HASH_LEN))


def _distinct_batch(
    rng: np.random.Generator, k: int, degrees: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Subsets for ``degrees`` with no two rows equal; returns ``(indptr, indices)``."""
    indptr = np.zeros(len(degrees) + 1, dtype=np.int64)
    np.cumsum(degrees, out=indptr[1:])
    indices = _random_subsets(rng, k, degrees)
    if len(degrees) < 2:
        return indptr, indices
    h = np.sort(_row_hashes(indptr, indices))
    if not (h[1:] == h[:-1]).any():
        return indptr, indices
    # rare: redraw exact duplicates until none remain
    for _ in range(1000 * (len(degrees) + 1)):
        seen: set[tuple] = set()
        dups = []
        for i in range(len(degrees)):
            key = tuple(indices[indptr[i] : indptr[i + 1]])
            if key in seen:
                dups.append(i)
            seen.add(key)
        if not dups:
            return indptr, indices
        fresh = _random_subsets(rng, k, degrees[dups])
        at = 0
        for i in dups:
            d = int(degrees[i])
            indices[indptr[i] : indptr[i + 1]] = fresh[at : at + d]
            at += d
    raise DuplicateExhaustion(f"could not draw {len(degrees)} distinct subsets of {k}")


def sample_counts(
    dist: DegreeDistribution, params: CodeParameters, rng: np.random.Generator
) -> np.ndarray:
    """Draw ``N_d`` for each degree of the support.

    Exact binomial ``B(C(k, d), p_d)`` when ``C(k, d) <= 2**20``, otherwise the
    Poisson limit with mean ``n Omega_d``.
    """
    plan = _plan(dist, params)
    counts = np.zeros(len(plan.probs), dtype=np.int64)
    if len(plan.trials):
        counts[plan.exact] = rng.binomial(plan.trials, plan.probs[plan.exact])
    if len(plan.means):
        counts[~plan.exact] = rng.poisson(plan.means)
    return counts


def sample_instance(dist: DegreeDistribution, params: CodeParameters, seed=None) -> CodeInstance:
    """Sample the received symbols of one Poisson-model code instance."""
    rng = make_rng(seed)
    k = params.k
    plan = _plan(dist, params)
    counts = sample_counts(dist, params, rng)
    pieces = []
    count_map: dict[int, int] = {}
    batch = []
    for idx in np.flatnonzero(counts):
        d = dist.degrees[idx]
        n_d = int(counts[idx])
        total = plan.totals[idx]
        if not plan.exact[idx]:
            if total is not None and n_d > total:
                # the Poisson limit overshot the number of available subsets
                n_d = total
            batch.append((d, n_d))
            count_map[d] = n_d
            continue
        if d == 1:
            rows = rng.choice(k, n_d, replace=False).reshape(n_d, 1).astype(np.int64)
        elif d > k - d:
            ranks = rng.choice(total, n_d, replace=False)
            rows = _complement(unrank_subsets(ranks, k, k - d), k, d)
        else:
            rows = unrank_subsets(rng.choice(total, n_d, replace=False), k, d)
        pieces.append((np.full(n_d, d, dtype=np.int64), rows.ravel()))
        count_map[d] = n_d
    if batch:
        degs = np.repeat([d for d, _ in batch], [c for _, c in batch]).astype(np.int64)
        _, flat = _distinct_batch(rng, k, degs)
        pieces.append((degs, flat))
    return _pack(params, pieces, dict(sorted(count_map.items())))


def _complement(rows: np.ndarray, k: int, d: int) -> np.ndarray:
    mask = np.ones((len(rows), k), dtype=bool)
    if rows.size:
        mask[np.arange(len(rows))[:, None], rows] = False
    return np.nonzero(mask)[1].reshape(len(rows), d).astype(np.int64)


def _pack(params: CodeParameters, pieces: list, count_map: dict[int, int]) -> CodeInstance:
    indptr = np.zeros(sum(len(lens) for lens, _ in pieces) + 1, dtype=np.int64)
    if pieces:
        np.cumsum(np.concatenate([lens for lens, _ in pieces]), out=indptr[1:])
        indices = np.concatenate([flat for _, flat in pieces]).astype(np.int64)
    else:
        indices = np.zeros(0, dtype=np.int64)
    return CodeInstance(params, indptr, indices, count_map)


def sample_fixed_count(
    dist: DegreeDistribution, k: int, count: int, seed=None
) -> CodeInstance:
    """Classical LT sampling: exactly ``count`` symbols, degrees i.i.d. from the
    distribution, neighbors uniform. Duplicate symbols are allowed."""
    rng = make_rng(seed)
    if dist.D > k:
        raise ValidationError(f"distribution degree {dist.D} exceeds k={k}")
    degs = rng.choice(dist.support, size=count, p=dist.weights / dist.weights.sum()).astype(np.int64)
    count_map = {d: int(c) for d, c in zip(*np.unique(degs, return_counts=True))}
    flat = _random_subsets(rng, k, degs)
    return _pack(CodeParameters(k=k, n=float(count)), [(degs, flat)], count_map)


def encode_payload(instance: CodeInstance, input_values) -> CodeInstance:
    """Fill every symbol's value with the XOR of its neighbors' values.

    ``input_values`` is a sequence of ``k`` equal-length byte strings or a
    ``(k, width)`` uint8 array.
    """
    vals = _as_payload_array(input_values)
    if len(vals) != instance.k:
        raise ValidationError(f"expected {instance.k} input values, got {len(vals)}")
    out = np.zeros((instance.N, vals.shape[1]), dtype=np.uint8)
    for i in range(instance.N):
        out[i] = np.bitwise_xor.reduce(vals[instance.neighbors(i)], axis=0)
    return replace(instance, values=out)


def _as_payload_array(values) -> np.ndarray:
    if isinstance(values, np.ndarray):
        arr = np.asarray(values, dtype=np.uint8)
        return arr.reshape(len(arr), -1)
    rows = [bytes(v) for v in values]
    if not rows:
        return np.zeros((0, PAYLOAD_WIDTH), dtype=np.uint8)
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValidationError("payload words must share one width")
    return np.frombuffer(b"".join(rows), dtype=np.uint8).reshape(len(rows), width).copy()


def random_payload(k: int, seed=None, width: int = PAYLOAD_WIDTH) -> np.ndarray:
    return make_rng(seed).integers(0, 256, size=(k, width), dtype=np.uint8)
