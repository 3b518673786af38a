"""Degree distributions for LT codes.

A distribution is stored sparsely: only the degrees with positive mass are
kept, sorted ascending.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DegreeOutOfRange, NegativeWeight, SumNotOne, ValidationError

SUM_TOL = 1e-9
DROP_BELOW = 1e-15


@dataclass(frozen=True)
class DegreeDistribution:
    degrees: tuple[int, ...]
    probs: tuple[float, ...]
    k: int | None = None

    @property
    def D(self) -> int:
        return self.degrees[-1]

    @property
    def support(self) -> np.ndarray:
        return np.asarray(self.degrees, dtype=np.int64)

    @property
    def weights(self) -> np.ndarray:
        return np.asarray(self.probs, dtype=float)

    def weight(self, d: int) -> float:
        try:
            return self.probs[self.degrees.index(d)]
        except ValueError:
            return 0.0

    def items(self) -> list[tuple[int, float]]:
        return list(zip(self.degrees, self.probs))

    def dense(self, length: int | None = None) -> np.ndarray:
        """Array ``w`` with ``w[d] = Omega_d`` for ``d = 0..length``."""
        length = self.D if length is None else length
        out = np.zeros(length + 1)
        for d, p in zip(self.degrees, self.probs):
            if d <= length:
                out[d] = p
        return out

    def mean_degree(self) -> float:
        return float(np.dot(self.support, self.weights))

    def to_json(self) -> str:
        # hand-rolled so probabilities carry exactly 17 significant digits
        rows = ", ".join(f'{{"d": {d}, "p": {p:.17g}}}' for d, p in self.items())
        k = "null" if self.k is None else str(self.k)
        return f'{{"k": {k}, "weights": [{rows}]}}\n'

    @classmethod
    def from_json(cls, text: str) -> DegreeDistribution:
        try:
            obj = json.loads(text)
            raw = [(int(w["d"]), float(w["p"])) for w in obj["weights"]]
        except (KeyError, TypeError, json.JSONDecodeError) as exc:
            raise ValidationError(f"malformed distribution JSON: {exc}") from exc
        return validate(raw, obj.get("k"))


def validate(
    raw_weights: Iterable[tuple[int, float]] | DegreeDistribution,
    k: int | None = None,
) -> DegreeDistribution:
    """Check and canonicalize a list of ``(degree, probability)`` pairs.

    Zero weights are dropped and the result is sorted by degree. The
    probabilities must already sum to one within ``1e-9``; they are not
    rescaled.
    """
    if isinstance(raw_weights, DegreeDistribution):
        if k is None:
            k = raw_weights.k
        raw_weights = raw_weights.items()
    pairs = [(int(d), float(p)) for d, p in raw_weights]
    if not pairs:
        raise ValidationError("degree distribution is empty")
    if k is not None:
        k = int(k)
        if k < 1:
            raise ValidationError(f"k must be positive, got {k}")
    seen = set()
    for d, p in pairs:
        if not math.isfinite(p):
            raise ValidationError(f"non-finite weight for degree {d}")
        if p < 0:
            raise NegativeWeight(f"negative weight {p} for degree {d}")
        if d < 1 or (k is not None and d > k):
            raise DegreeOutOfRange(f"degree {d} outside [1, {k if k is not None else 'inf'}]")
        if d in seen:
            raise ValidationError(f"degree {d} listed twice")
        seen.add(d)
    total = math.fsum(p for _, p in pairs)
    if abs(total - 1.0) > SUM_TOL:
        raise SumNotOne(f"weights sum to {total!r}, not 1")
    pairs = sorted((d, p) for d, p in pairs if p > 0)
    return DegreeDistribution(
        degrees=tuple(d for d, _ in pairs), probs=tuple(p for _, p in pairs), k=k
    )


def _from_dense(mass: Sequence[float], k: int) -> DegreeDistribution:
    mass = np.asarray(mass, dtype=float)
    mass = mass / math.fsum(mass)
    degrees = [d for d in range(1, len(mass)) if mass[d] >= DROP_BELOW]
    return DegreeDistribution(
        degrees=tuple(degrees), probs=tuple(float(mass[d]) for d in degrees), k=k
    )


def soliton_ideal(k: int) -> DegreeDistribution:
    """Ideal soliton: ``Omega_1 = 1/k`` and ``Omega_d = 1/(d(d-1))`` for d >= 2."""
    if k < 2:
        raise ValidationError(f"ideal soliton needs k >= 2, got {k}")
    mass = np.zeros(k + 1)
    mass[1] = 1.0 / k
    d = np.arange(2, k + 1, dtype=float)
    mass[2:] = 1.0 / (d * (d - 1.0))
    return _from_dense(mass, k)


def robust_spike(k: int, c: float, delta_rs: float) -> tuple[float, int]:
    """Return ``(R, spike)`` where spike is k/R rounded and clamped to [2, k]."""
    R = c * math.log(k / delta_rs) * math.sqrt(k)
    spike = min(max(int(round(k / R)), 2), k)
    return R, spike


def soliton_robust(k: int, c: float, delta_rs: float) -> DegreeDistribution:
    """Robust soliton distribution.

    Adds ``tau(d) = R/(d k)`` for ``d`` below the spike and
    ``R log(R/delta_rs)/k`` at the spike to the ideal soliton, then
    renormalizes.

    Parameters
    ----------
    k : int
        Number of input symbols, at least 2.
    c : float
        Positive tuning constant.
    delta_rs : float
        Failure-probability parameter in (0, 1).
    """
    if k < 2:
        raise ValidationError(f"robust soliton needs k >= 2, got {k}")
    if not c > 0:
        raise ValidationError(f"c must be positive, got {c}")
    if not 0 < delta_rs < 1:
        raise ValidationError(f"delta_rs must lie in (0, 1), got {delta_rs}")
    R, spike = robust_spike(k, c, delta_rs)
    mass = np.zeros(k + 1)
    mass[1] = 1.0 / k
    d = np.arange(2, k + 1, dtype=float)
    mass[2:] = 1.0 / (d * (d - 1.0))
    below = np.arange(1, spike, dtype=float)
    mass[1:spike] += R / (below * k)
    mass[spike] += max(R * math.log(R / delta_rs) / k, 0.0)
    return _from_dense(mass, k)


def load(path: str | Path) -> DegreeDistribution:
    return DegreeDistribution.from_json(Path(path).read_text())


def save(dist: DegreeDistribution, path: str | Path) -> None:
    Path(path).write_text(dist.to_json())
