"""Independent reference implementations used only by the tests.

They share no code with the package: probabilities come straight from
``math.comb``, the recursion is evaluated literally in mpmath, and
decodability is decided by a set-based closure.
"""

from __future__ import annotations

import itertools
import math

import mpmath as mp

mp.mp.dps = 50


def presence(d, w, k, n):
    return mp.mpf(n) * mp.mpf(w) / math.comb(k, d)


def closure(k, sets):
    """Inputs recoverable by repeatedly using a set with one unknown member."""
    known = set()
    sets = [frozenset(s) for s in sets]
    changed = True
    while changed:
        changed = False
        for s in sets:
            rest = s - known
            if len(rest) == 1:
                known |= rest
                changed = True
    return known


def brute_force(weights, k, n):
    """Failure probability by enumerating subset configurations, in mpmath."""
    subsets, probs = [], []
    for d, w in weights:
        p = presence(d, w, k, n)
        for s in itertools.combinations(range(k), d):
            subsets.append(s)
            probs.append(p)
    total = mp.mpf(0)
    for present in itertools.product((0, 1), repeat=len(subsets)):
        weight = mp.mpf(1)
        for bit, p in zip(present, probs):
            weight *= p if bit else 1 - p
        chosen = [s for s, b in zip(subsets, present) if b]
        if len(closure(k, chosen)) < k:
            total += weight
    return total


def q_direct(weights, k, n, u):
    """Join probability, evaluated literally."""
    prod = mp.mpf(1)
    for d, w in weights:
        if d < 2:
            continue
        e = math.comb(k - u, d - 2)
        prod *= (1 - presence(d, w, k, n)) ** e
    return 1 - prod


def ripple_table(weights, k, n):
    """Every row ``Q(u, .)`` of the ripple recursion, ``u = k..1``."""
    w = dict(weights)
    p1 = presence(1, w[1], k, n) if 1 in w else mp.mpf(0)
    row = [mp.binomial(k, r) * p1**r * (1 - p1) ** (k - r) for r in range(k + 1)]
    rows = {k: row}
    for u in range(k, 1, -1):
        q = q_direct(weights, k, n, u)
        nxt = [mp.mpf(0)] * u
        nxt[0] += row[0]
        for r in range(u):
            for s in range(1, u + 1):
                j = r - s + 1
                if 0 <= j <= u - s:
                    nxt[r] += row[s] * mp.binomial(u - s, j) * q**j * (1 - q) ** (u - r - 1)
        row = nxt
        rows[u - 1] = row
    return rows


def failure(weights, k, n):
    return ripple_table(weights, k, n)[1][0]


def first_negative(F, points=1_000_000, right=1.0 - 1e-12):
    """Left end of the first grid cell where ``F`` turns negative."""
    import numpy as np

    t = np.linspace(0.0, right, points)
    vals = F(t)
    idx = int(np.flatnonzero(vals < 0)[0])
    return float(t[idx - 1]), float(t[idx])
