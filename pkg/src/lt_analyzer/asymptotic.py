"""Limiting recoverable fraction of the peeling decoder.

With ``n = (1 + delta) k`` the decoder recovers, as ``k`` grows, a fraction
``z*`` of the inputs: the first point of [0, 1) where

    F(t) = beta'(t) + log(1 - t)

turns negative, with ``beta_1 = -log(1 - (1 + delta) Omega_1)`` and
``beta_d = (1 + delta) Omega_d`` for ``d >= 2``. The limit is only
guaranteed when ``F`` has no root in ``[0, z*)``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly

from .degree_dist import DegreeDistribution
from .errors import DegreeOneSaturated, ValidationError

RIGHT_GUARD = 1e-12
TOUCH_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class BetaSeries:
    delta: float
    degrees: tuple[int, ...]
    coefficients: tuple[float, ...]

    @property
    def beta1(self) -> float:
        return self.coefficients[0] if self.degrees and self.degrees[0] == 1 else 0.0

    def _derivative_coeffs(self) -> np.ndarray:
        # dense coefficients of beta'(t) in increasing powers
        out = np.zeros(max(self.degrees))
        for d, b in zip(self.degrees, self.coefficients):
            out[d - 1] += d * b
        return out

    def derivative(self, t) -> np.ndarray:
        return npoly.polyval(np.asarray(t, dtype=float), self._derivative_coeffs())

    def F(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return self.derivative(t) + np.log1p(-t)


def beta_series(dist: DegreeDistribution, delta: float) -> BetaSeries:
    if delta < 0:
        raise ValidationError(f"overhead must be non-negative, got {delta}")
    scale = 1.0 + delta
    coeffs = []
    for d, w in zip(dist.degrees, dist.probs):
        if d == 1:
            if scale * w >= 1.0:
                raise DegreeOneSaturated(
                    f"(1+delta)*Omega_1 = {scale * w:.6g} >= 1; beta_1 is undefined"
                )
            coeffs.append(-math.log1p(-scale * w))
        else:
            coeffs.append(scale * w)
    return BetaSeries(delta, tuple(dist.degrees), tuple(coeffs))


@dataclass(frozen=True, eq=False)
class AsymptoticResult:
    z_star: float
    hypotheses_hold: bool
    boundary_note: str = ""
    F_samples: np.ndarray | None = field(default=None, repr=False)
    grid: np.ndarray | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "z_star": self.z_star,
            "hypotheses_hold": self.hypotheses_hold,
            "boundary_note": self.boundary_note,
        }


def _bisect(f, lo: float, hi: float, tol: float) -> float:
    """Shrink ``[lo, hi]`` with ``f(lo) >= 0 > f(hi)`` to width below ``tol``."""
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if f(mid) < 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def collapse_fraction(
    series: BetaSeries,
    tol: float = 1e-12,
    grid_points: int = 10_000,
    keep_samples: bool = False,
) -> AsymptoticResult:
    """Locate ``z* = inf{t in [0,1): F(t) < 0}`` by grid scan then bisection.

    The scan finds the first sign change, which bisection alone cannot.
    ``hypotheses_hold`` is false when ``F`` touches zero before ``z*``: an
    isolated near-zero grid minimum, or ``F(0) = 0`` from a missing degree-1
    component.
    """
    if not tol > 0:
        raise ValidationError("tol must be positive")
    if grid_points < 100:
        raise ValidationError("grid_points must be at least 100")
    grid = np.linspace(0.0, 1.0 - RIGHT_GUARD, grid_points)
    vals = series.F(grid)
    neg = np.flatnonzero(vals < 0)
    notes = []

    def F(t):
        return float(series.F(t))

    if len(neg) == 0:
        # root lies beyond the right guard; work in s = -log(1 - t)
        deriv1 = float(series.derivative(1.0))
        G = lambda s: float(series.derivative(-math.expm1(-s))) - s
        s_lo, s_hi = -math.log(RIGHT_GUARD), deriv1 + 1.0
        s_star = _bisect(G, s_lo, s_hi, tol) if G(s_hi) < 0 <= G(s_lo) else s_hi
        z = -math.expm1(-s_star)
        notes.append(f"root within {RIGHT_GUARD:g} of 1 (log(1-z*) = {-s_star:.6g})")
        first = len(grid)
    else:
        first = int(neg[0])
        if first == 0:
            z = 0.0
            notes.append("F(0) < 0")
        else:
            z = _bisect(F, float(grid[first - 1]), float(grid[first]), tol)

    hold = True
    if vals[0] <= 1e-15:
        hold = False
        notes.append("F(0) = 0: no degree-1 component, decoding cannot start")
    before = vals[:first]
    if len(before) > 2:
        inner = before[1:-1]
        touch = (np.abs(inner) <= TOUCH_TOL) & (before[:-2] > inner) & (before[2:] > inner)
        if touch.any():
            hold = False
            t_touch = grid[1 : len(before) - 1][touch][0]
            notes.append(f"F touches zero near t = {t_touch:.6g} before z*")
    z = min(max(z, 0.0), 1.0)
    return AsymptoticResult(
        z_star=z,
        hypotheses_hold=hold,
        boundary_note="; ".join(notes),
        F_samples=vals if keep_samples else None,
        grid=grid if keep_samples else None,
    )


def ripple_fraction_curve(series: BetaSeries, grid) -> list[tuple[float, float]]:
    """``(t, (1 - t) F(t))`` for each ``t`` in ``grid``."""
    t = np.asarray(grid, dtype=float)
    if t.size and (t.min() < 0 or t.max() >= 1):
        raise ValidationError("curve points must lie in [0, 1)")
    vals = (1.0 - t) * series.F(t)
    return [(float(a), float(b)) for a, b in zip(t, vals)]


def curve_csv(series: BetaSeries, grid) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "F", "ripple_fraction"])
    t = np.asarray(grid, dtype=float)
    F = series.F(t)
    for a, f, r in zip(t, F, (1.0 - t) * F):
        w.writerow([repr(float(a)), repr(float(f)), repr(float(r))])
    return buf.getvalue()
