"""Pure-Python/numpy versions of the compiled kernels in ``_kernels.pyx``."""

from __future__ import annotations

from collections import deque

import numpy as np


def peel_csr(k, indptr, indices, schedule="fifo"):
    """Peel a CSR symbol list; returns ``(order, resolver, trajectory, ops)``.

    ``schedule`` picks which ripple member is decoded next: ``"fifo"`` (the
    compiled kernel's rule) or ``"lifo"``. The decoded set does not depend on
    it; the trajectory and order do.
    """
    indptr = [int(x) for x in indptr]
    indices = [int(x) for x in indices]
    n_out = len(indptr) - 1
    count = [indptr[o + 1] - indptr[o] for o in range(n_out)]
    xr = [0] * n_out
    incident: list[list[int]] = [[] for _ in range(k)]
    for o in range(n_out):
        for e in range(indptr[o], indptr[o + 1]):
            xr[o] ^= indices[e]
            incident[indices[e]].append(o)

    state = [0] * k  # 0 undecoded, 1 in ripple, 2 decoded
    resolver = [-1] * k
    ripple: deque[int] = deque()
    first = []
    for o in range(n_out):
        if count[o] == 1:
            b = xr[o]
            if state[b] == 0:
                state[b] = 1
                resolver[b] = o
                first.append(b)
    ripple.extend(sorted(first))

    order = []
    traj = [len(ripple)] if k > 0 else []
    ops = 0
    u = k
    while ripple:
        a = ripple.popleft() if schedule == "fifo" else ripple.pop()
        state[a] = 2
        order.append(a)
        u -= 1
        joined = []
        for o in incident[a]:
            if count[o] == 0:
                continue
            count[o] -= 1
            xr[o] ^= a
            ops += 1
            if count[o] == 1:
                b = xr[o]
                if state[b] == 0:
                    state[b] = 1
                    resolver[b] = o
                    joined.append(b)
        ripple.extend(sorted(joined))
        if u == 0:
            break
        traj.append(len(ripple))

    return (
        np.array(order, dtype=np.int64),
        np.array(resolver, dtype=np.int64),
        np.array(traj, dtype=np.int64),
        ops,
    )


def sample_subsets(k, degrees, uniforms):
    """Partial Fisher-Yates subsets (see ``_kernels.sample_subsets``)."""
    perm = list(range(k))
    out = []
    pos = 0
    for d in degrees:
        d = int(d)
        swaps = []
        for t in range(d):
            j = min(t + int(uniforms[pos + t] * (k - t)), k - 1)
            swaps.append(j)
            perm[t], perm[j] = perm[j], perm[t]
        out.extend(sorted(perm[:d]))
        for t in range(d - 1, -1, -1):
            j = swaps[t]
            perm[t], perm[j] = perm[j], perm[t]
        pos += d
    return np.array(out, dtype=np.int64)


def transfer_row(row, q, log_fact):
    """One step of the ripple recursion (see ``_kernels.transfer_row``)."""
    row = np.asarray(row, dtype=float)
    u = len(row) - 1
    if u == 0:
        return row[:1].copy()
    if q <= 0.0:
        out = row[1:].copy()
        out[0] += row[0]
        return out
    if q >= 1.0:
        out = np.zeros(u)
        out[u - 1] = row[1:].sum()
        out[0] += row[0]
        return out
    s = np.arange(1, u + 1)
    m = u - s
    j = np.arange(u)[None, :] - s[:, None] + 1
    valid = (j >= 0) & (j <= m[:, None])
    jc = np.where(valid, j, 0)
    mj = np.where(valid, m[:, None] - jc, 0)
    lp = np.where(valid, (
        log_fact[m][:, None]
        - log_fact[jc]
        - log_fact[mj]
        + jc * np.log(q)
        + mj * np.log1p(-q)
    ), -np.inf)
    pmf = np.exp(lp)
    out = row[1:] @ pmf
    out[0] += row[0]
    return out
