"""Belief-propagation (peeling) decoder with ripple instrumentation."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from . import _fallback, kernels
from .errors import MissingValues
from .sampler import CodeInstance


@dataclass(frozen=True, eq=False)
class DecodeResult:
    """Outcome of one peeling run.

    ``ripple_trajectory[i]`` is the ripple size ``X_u`` at ``u = k - i``
    undecoded symbols. It stops at the first ``X_u = 0``, or after ``X_1``
    on success.
    """

    k: int
    order: np.ndarray
    resolver: np.ndarray
    ripple_trajectory: np.ndarray
    ops: int
    recovered_values: np.ndarray | None = None

    @property
    def decoded(self) -> frozenset[int]:
        return frozenset(int(a) for a in self.order)

    @property
    def n_decoded(self) -> int:
        return len(self.order)

    @property
    def decoded_fraction(self) -> float:
        return self.n_decoded / self.k if self.k else 1.0

    @property
    def success(self) -> bool:
        return self.n_decoded == self.k

    def trajectory_pairs(self) -> list[tuple[int, int]]:
        return [(self.k - i, int(x)) for i, x in enumerate(self.ripple_trajectory)]

    def trajectory_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["u", "X_u"])
        writer.writerows(self.trajectory_pairs())
        return buf.getvalue()


def peel(instance: CodeInstance, schedule: str = "fifo") -> DecodeResult:
    """Run the peeling decoder.

    The ripple is a FIFO queue; symbols joining in the same step enter in
    ascending index order. ``schedule="lifo"`` (pure-Python path only)
    exists to check that the decoded set does not depend on the schedule.
    """
    if schedule == "fifo":
        order, resolver, traj, ops = kernels.peel_csr(
            instance.k, instance.indptr, instance.indices
        )
    else:
        order, resolver, traj, ops = _fallback.peel_csr(
            instance.k, instance.indptr, instance.indices, schedule=schedule
        )
    result = DecodeResult(instance.k, order, resolver, traj, ops)
    if instance.values is not None:
        result = DecodeResult(
            instance.k, order, resolver, traj, ops, _solve_values(result, instance)
        )
    return result


def _solve_values(result: DecodeResult, instance: CodeInstance) -> np.ndarray:
    width = instance.values.shape[1]
    vals = np.zeros((instance.k, width), dtype=np.uint8)
    for a in result.order:
        o = result.resolver[a]
        nbrs = instance.neighbors(o)
        others = nbrs[nbrs != a]
        v = instance.values[o].copy()
        if len(others):
            v ^= np.bitwise_xor.reduce(vals[others], axis=0)
        vals[a] = v
    return vals


@dataclass(frozen=True)
class PartialRecovery:
    """Recovered payloads keyed by input index; complete when every index is present."""

    k: int
    values: dict[int, bytes]

    @property
    def complete(self) -> bool:
        return len(self.values) == self.k

    def as_list(self) -> list[bytes]:
        return [self.values[i] for i in range(self.k)]


def recover_values(result: DecodeResult, instance: CodeInstance) -> list[bytes] | PartialRecovery:
    """Payloads of the decoded inputs: a full list on success, else a
    :class:`PartialRecovery` defined exactly on ``result.decoded``."""
    if instance.values is None:
        raise MissingValues("instance carries no payload values; call encode_payload first")
    vals = result.recovered_values
    if vals is None:
        vals = _solve_values(result, instance)
    recovered = {int(a): vals[a].tobytes() for a in result.order}
    partial = PartialRecovery(instance.k, recovered)
    return partial.as_list() if partial.complete else partial


def stalled_symbols(result: DecodeResult, instance: CodeInstance) -> list[int]:
    """Output symbols with exactly one undecoded neighbor after termination.

    Always empty for a finished run; used to check the stopping rule.
    """
    decoded = np.zeros(instance.k, dtype=bool)
    decoded[result.order] = True
    bad = []
    for o in range(instance.N):
        if np.count_nonzero(~decoded[instance.neighbors(o)]) == 1:
            bad.append(o)
    return bad
