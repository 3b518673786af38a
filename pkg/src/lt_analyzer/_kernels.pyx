# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: the peeling decoder and one step of the ripple DP.

Behavior is identical to ``_fallback``; the tests compare the two.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, log1p
from libc.stdlib cimport qsort

cnp.import_array()

ctypedef cnp.int64_t i64


cdef void _sort_range(i64[::1] a, Py_ssize_t lo, Py_ssize_t hi) noexcept nogil:
    # insertion sort; the ranges are the handful of symbols joining per step
    cdef Py_ssize_t i, j
    cdef i64 key
    for i in range(lo + 1, hi):
        key = a[i]
        j = i - 1
        while j >= lo and a[j] > key:
            a[j + 1] = a[j]
            j -= 1
        a[j + 1] = key


cdef int _cmp_i64(const void* a, const void* b) noexcept nogil:
    cdef i64 x = (<const i64*>a)[0]
    cdef i64 y = (<const i64*>b)[0]
    return (x > y) - (x < y)


def sample_subsets(Py_ssize_t k, const i64[::1] degrees, const double[::1] uniforms):
    """Uniform d-subsets by partial Fisher-Yates, one per entry of ``degrees``.

    Consumes ``uniforms`` in order, ``d`` per subset; returns the members
    flattened, each subset sorted ascending.
    """
    cdef Py_ssize_t m = degrees.shape[0]
    cdef Py_ssize_t i, t, j, d, pos = 0
    cdef i64 tmp
    out_arr = np.empty(uniforms.shape[0], dtype=np.int64)
    perm_arr = np.arange(k, dtype=np.int64)
    swaps_arr = np.empty(k, dtype=np.int64)
    cdef i64[::1] out = out_arr
    cdef i64[::1] perm = perm_arr
    cdef i64[::1] swaps = swaps_arr
    with nogil:
        for i in range(m):
            d = degrees[i]
            for t in range(d):
                j = t + <Py_ssize_t>(uniforms[pos + t] * (k - t))
                if j >= k:
                    j = k - 1
                swaps[t] = j
                tmp = perm[t]
                perm[t] = perm[j]
                perm[j] = tmp
                out[pos + t] = perm[t]
            # restore the identity permutation
            for t in range(d - 1, -1, -1):
                j = swaps[t]
                tmp = perm[t]
                perm[t] = perm[j]
                perm[j] = tmp
            qsort(&out[pos], d, sizeof(i64), _cmp_i64)
            pos += d
    return out_arr


def peel_csr(Py_ssize_t k, const i64[::1] indptr, const i64[::1] indices):
    """Peel a CSR symbol list; returns ``(order, resolver, trajectory, ops)``."""
    cdef Py_ssize_t n_out = indptr.shape[0] - 1
    cdef Py_ssize_t n_edges = indices.shape[0]
    cdef Py_ssize_t o, e, a, b, t, head = 0, tail = 0, joined_from
    cdef Py_ssize_t u = k, n_traj = 0
    cdef i64 ops = 0

    count_arr = np.empty(n_out, dtype=np.int64)
    xr_arr = np.zeros(n_out, dtype=np.int64)
    in_ptr_arr = np.zeros(k + 1, dtype=np.int64)
    in_idx_arr = np.empty(n_edges, dtype=np.int64)
    fill_arr = np.empty(k, dtype=np.int64)
    state_arr = np.zeros(k, dtype=np.int8)
    queue_arr = np.empty(k, dtype=np.int64)
    resolver_arr = np.full(k, -1, dtype=np.int64)
    traj_arr = np.empty(k + 1, dtype=np.int64)

    cdef i64[::1] count = count_arr
    cdef i64[::1] xr = xr_arr
    cdef i64[::1] in_ptr = in_ptr_arr
    cdef i64[::1] in_idx = in_idx_arr
    cdef i64[::1] fill = fill_arr
    cdef cnp.int8_t[::1] state = state_arr
    cdef i64[::1] queue = queue_arr
    cdef i64[::1] resolver = resolver_arr
    cdef i64[::1] traj = traj_arr

    with nogil:
        for o in range(n_out):
            count[o] = indptr[o + 1] - indptr[o]
            for e in range(indptr[o], indptr[o + 1]):
                xr[o] ^= indices[e]
                in_ptr[indices[e] + 1] += 1
        for a in range(k):
            in_ptr[a + 1] += in_ptr[a]
            fill[a] = in_ptr[a]
        for o in range(n_out):
            for e in range(indptr[o], indptr[o + 1]):
                a = indices[e]
                in_idx[fill[a]] = o
                fill[a] += 1

        # state: 0 undecoded, 1 in ripple, 2 decoded
        for o in range(n_out):
            if count[o] == 1:
                b = xr[o]
                if state[b] == 0:
                    state[b] = 1
                    resolver[b] = o
                    queue[tail] = b
                    tail += 1
        _sort_range(queue, 0, tail)
        if k > 0:
            traj[n_traj] = tail - head
            n_traj += 1

        while head < tail:
            a = queue[head]
            head += 1
            state[a] = 2
            u -= 1
            joined_from = tail
            for t in range(in_ptr[a], in_ptr[a + 1]):
                o = in_idx[t]
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
                        queue[tail] = b
                        tail += 1
            _sort_range(queue, joined_from, tail)
            if u == 0:
                break
            traj[n_traj] = tail - head
            n_traj += 1

    return queue_arr[:head].copy(), resolver_arr, traj_arr[:n_traj].copy(), int(ops)


def transfer_row(const double[::1] row, double q, const double[::1] log_fact):
    """One step of the ripple recursion: ``Pr[X_u = .]`` to ``Pr[X_{u-1} = .]``.

    ``row`` has length ``u + 1``; ``log_fact[i] = log(i!)``. Each output entry
    accumulates its terms in ascending ``s``.
    """
    cdef Py_ssize_t u = row.shape[0] - 1
    cdef Py_ssize_t s, j, m
    cdef double c, lq, l1q, lp
    out_arr = np.zeros(max(u, 1), dtype=np.float64)
    cdef double[::1] out = out_arr
    if u == 0:
        out[0] = row[0]
        return out_arr
    out[0] = row[0]
    with nogil:
        if q <= 0.0:
            for s in range(1, u + 1):
                out[s - 1] += row[s]
        elif q >= 1.0:
            for s in range(1, u + 1):
                # every remaining symbol joins: r = s - 1 + (u - s) = u - 1
                out[u - 1] += row[s]
        else:
            lq = log(q)
            l1q = log1p(-q)
            for s in range(1, u + 1):
                c = row[s]
                if c == 0.0:
                    continue
                m = u - s
                for j in range(m + 1):
                    lp = log_fact[m] - log_fact[j] - log_fact[m - j] + j * lq + (m - j) * l1q
                    out[s - 1 + j] += c * exp(lp)
    return out_arr
