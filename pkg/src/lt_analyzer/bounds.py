"""Tail bounds on the received count and fixed-count sandwiches.

The received count ``N`` has mean ``n`` and is a sum of independent
Bernoulli variables, so

    Pr[N >= n + D] <= exp(-D^2 / (2 (n + D/3)))
    Pr[N <= n - D] <= exp(-D^2 / (2 n))

Mixing a monotone fixed-count quantity over ``N`` with these tails gives
two-sided bounds from Poisson-model values at nearby means.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .errors import ValidationError


@dataclass(frozen=True)
class TailBound:
    n: float
    delta_dev: float
    upper_tail: float
    lower_tail: float


def tail_bounds(n: float, delta_dev: float) -> TailBound:
    if not n > 0:
        raise ValidationError(f"n must be positive, got {n}")
    if delta_dev < 0:
        raise ValidationError(f"deviation must be non-negative, got {delta_dev}")
    up = math.exp(-(delta_dev**2) / (2.0 * (n + delta_dev / 3.0)))
    lo = math.exp(-(delta_dev**2) / (2.0 * n))
    return TailBound(n, delta_dev, up, lo)


@dataclass(frozen=True)
class SandwichResult:
    n: float
    n1: float
    n2: float
    lower: float
    upper: float
    degenerate: bool = False

    @property
    def consistent(self) -> bool:
        return self.lower <= self.upper

    def to_dict(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "consistent": self.consistent,
            "degenerate": self.degenerate,
            "n": self.n,
            "n1": self.n1,
            "n2": self.n2,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _check_window(n, n1, n2, *probs):
    if not n1 <= n <= n2:
        raise ValidationError(f"need n1 <= n <= n2, got {n1}, {n}, {n2}")
    if n1 < 0:
        raise ValidationError("n1 must be non-negative")
    for p in probs:
        if not 0.0 <= p <= 1.0:
            raise ValidationError(f"probability {p} outside [0, 1]")


def sandwich(p_p_n1: float, p_p_n2: float, n: float, n1: float, n2: float) -> SandwichResult:
    """Bounds on a fixed-count quantity that is non-decreasing in the count.

    ``lower = P_p(n1) - exp(-3 (n-n1)^2 / (2 (2 n1 + n)))`` and
    ``upper = P_p(n2) / (1 - exp(-(n2-n)^2 / (2 n2)))``, clamped to [0, 1].
    With ``n2 == n`` the upper denominator vanishes and ``upper = 1`` with
    ``degenerate`` set. The bounds may cross for tight windows; check
    ``consistent``.

    Decoding *success* is the non-decreasing quantity; for failure
    probabilities use :func:`failure_sandwich`.
    """
    _check_window(n, n1, n2, p_p_n1, p_p_n2)
    if 2 * n1 + n > 0:
        lower = p_p_n1 - math.exp(-3.0 * (n - n1) ** 2 / (2.0 * (2.0 * n1 + n)))
    else:
        lower = p_p_n1 - 1.0
    lower = max(0.0, lower)
    denom = 1.0 - math.exp(-((n2 - n) ** 2) / (2.0 * n2)) if n2 > 0 else 0.0
    if denom <= 0.0:
        return SandwichResult(n, n1, n2, lower, 1.0, degenerate=True)
    upper = min(1.0, p_p_n2 / denom)
    return SandwichResult(n, n1, n2, lower, upper)


def failure_sandwich(
    fail_n1: float, fail_n2: float, n: float, n1: float, n2: float
) -> SandwichResult:
    """Bounds on the fixed-count failure probability ``P_f(n)``.

    Failure falls as the count grows, so the sandwich is applied to the
    success probabilities ``1 - P_p`` and mapped back:
    ``1 - upper_s <= P_f(n) <= 1 - lower_s``.
    """
    _check_window(n, n1, n2, fail_n1, fail_n2)
    s = sandwich(1.0 - fail_n1, 1.0 - fail_n2, n, n1, n2)
    return SandwichResult(n, n1, n2, 1.0 - s.upper, 1.0 - s.lower, s.degenerate)


def default_window(n: float, width: float = 3.0) -> tuple[float, float]:
    """``(n - width*sqrt(n), n + width*sqrt(n))``, lower end clamped at 0."""
    half = width * math.sqrt(n)
    return max(0.0, n - half), n + half
