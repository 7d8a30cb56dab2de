# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops. Signatures and results mirror ``_pykernels`` exactly."""

import numpy as np
cimport numpy as cnp

cnp.import_array()

ctypedef cnp.int64_t i64
ctypedef cnp.float64_t f64


cdef inline i64 _find(i64[::1] parent, i64 x) noexcept nogil:
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


def kruskal_pass(i64 n, const i64[::1] eu, const i64[::1] ev):
    cdef Py_ssize_t m = eu.shape[0]
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] mask_arr = np.zeros(m, dtype=np.uint8)
    cdef cnp.uint8_t[::1] mask = mask_arr
    cdef i64[::1] parent = np.arange(n, dtype=np.int64)
    cdef i64[::1] size = np.ones(n, dtype=np.int64)
    cdef i64 joined = 0, ru, rv
    cdef Py_ssize_t e
    with nogil:
        for e in range(m):
            if joined >= n - 1:
                break
            ru = _find(parent, eu[e])
            rv = _find(parent, ev[e])
            if ru == rv:
                continue
            if size[ru] < size[rv]:
                ru, rv = rv, ru
            parent[rv] = ru
            size[ru] += size[rv]
            mask[e] = 1
            joined += 1
    return mask_arr.astype(bool), joined


def degree_pass(const i64[::1] eu, const i64[::1] ev, i64[::1] deg, i64 gamma):
    cdef Py_ssize_t m = eu.shape[0]
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] mask_arr = np.zeros(m, dtype=np.uint8)
    cdef cnp.uint8_t[::1] mask = mask_arr
    cdef Py_ssize_t e
    cdef i64 u, v
    with nogil:
        for e in range(m):
            u = eu[e]
            v = ev[e]
            if deg[u] < gamma and deg[v] < gamma:
                deg[u] += 1
                deg[v] += 1
                mask[e] = 1
    return mask_arr.astype(bool)


def component_labels(const i64[::1] indptr, const i64[::1] indices, const i64[::1] assign):
    cdef Py_ssize_t n = assign.shape[0]
    cdef cnp.ndarray[i64, ndim=1] labels_arr = np.full(n, -1, dtype=np.int64)
    cdef i64[::1] labels = labels_arr
    cdef i64[::1] queue = np.empty(max(n, 1), dtype=np.int64)
    cdef i64 ncomp = 0, head, tail, u, w, blk
    cdef Py_ssize_t s, p
    with nogil:
        for s in range(n):
            if labels[s] != -1:
                continue
            blk = assign[s]
            labels[s] = ncomp
            queue[0] = s
            head = 0
            tail = 1
            while head < tail:
                u = queue[head]
                head += 1
                for p in range(indptr[u], indptr[u + 1]):
                    w = indices[p]
                    if labels[w] == -1 and assign[w] == blk:
                        labels[w] = ncomp
                        queue[tail] = w
                        tail += 1
            ncomp += 1
    return labels_arr, ncomp


cdef bint _connected_without(const i64[::1] indptr, const i64[::1] indices,
                             const i64[::1] assign, i64 v, i64 size,
                             i64[::1] stamp, i64 mark, i64[::1] queue) noexcept nogil:
    cdef i64 blk = assign[v], start = -1, u, w, head, tail, reached
    cdef Py_ssize_t p
    if size <= 2:
        return True
    for p in range(indptr[v], indptr[v + 1]):
        w = indices[p]
        if assign[w] == blk:
            start = w
            break
    if start == -1:
        return False
    stamp[v] = mark
    stamp[start] = mark
    queue[0] = start
    head = 0
    tail = 1
    reached = 1
    while head < tail:
        u = queue[head]
        head += 1
        for p in range(indptr[u], indptr[u + 1]):
            w = indices[p]
            if stamp[w] != mark and assign[w] == blk:
                stamp[w] = mark
                queue[tail] = w
                tail += 1
                reached += 1
    return reached == size - 1


def connected_without(const i64[::1] indptr, const i64[::1] indices,
                      const i64[::1] assign, i64 v, i64 size):
    cdef Py_ssize_t n = assign.shape[0]
    cdef i64[::1] stamp = np.zeros(n, dtype=np.int64)
    cdef i64[::1] queue = np.empty(n, dtype=np.int64)
    return bool(_connected_without(indptr, indices, assign, v, size, stamp, 1, queue))


def pairwise_cost(const f64[:, ::1] travel, const i64[::1] assign):
    cdef Py_ssize_t n = assign.shape[0], i, j
    cdef f64 total = 0.0, row
    cdef i64 a
    with nogil:
        for i in range(n):
            a = assign[i]
            row = 0.0
            for j in range(i + 1, n):
                if assign[j] == a:
                    row += travel[i, j]
            total += row
    return total


def local_search(const i64[::1] indptr, const i64[::1] indices,
                 const f64[:, ::1] travel, i64[::1] assign,
                 const f64[::1] weight, f64[::1] loads, i64[::1] sizes,
                 f64[:, ::1] sums, f64 cap, i64 max_rounds):
    cdef Py_ssize_t n = assign.shape[0]
    cdef Py_ssize_t k = loads.shape[0]
    cdef i64[::1] cnt = np.zeros(k, dtype=np.int64)
    cdef i64[::1] touched = np.empty(k, dtype=np.int64)
    cdef i64[::1] stamp = np.zeros(n, dtype=np.int64)
    cdef i64[::1] queue = np.empty(n, dtype=np.int64)
    cdef i64 mark = 0, moves = 0, rounds = 0, ntouched, a, b, best, best_gain, gain, v, w, t
    cdef f64 delta, best_delta, wv
    cdef Py_ssize_t p, j
    cdef bint moved
    with nogil:
        while rounds < max_rounds:
            rounds += 1
            moved = False
            for v in range(n):
                a = assign[v]
                if sizes[a] <= 1:
                    continue
                ntouched = 0
                for p in range(indptr[v], indptr[v + 1]):
                    t = assign[indices[p]]
                    if cnt[t] == 0:
                        touched[ntouched] = t
                        ntouched += 1
                    cnt[t] += 1
                best = -1
                best_gain = 0
                best_delta = 0.0
                wv = weight[v]
                for j in range(ntouched):
                    b = touched[j]
                    if b == a:
                        continue
                    gain = cnt[b] - cnt[a]
                    if gain <= 0 or loads[b] + wv > cap:
                        continue
                    delta = sums[v, b] - sums[v, a]
                    if delta > 0.0:
                        continue
                    if (best == -1 or gain > best_gain
                            or (gain == best_gain and (delta < best_delta
                                or (delta == best_delta and b < best)))):
                        best = b
                        best_gain = gain
                        best_delta = delta
                for j in range(ntouched):
                    cnt[touched[j]] = 0
                if best == -1:
                    continue
                mark += 1
                if not _connected_without(indptr, indices, assign, v, sizes[a],
                                          stamp, mark, queue):
                    continue
                assign[v] = best
                loads[a] -= wv
                loads[best] += wv
                sizes[a] -= 1
                sizes[best] += 1
                for w in range(n):
                    sums[w, a] -= travel[v, w]
                    sums[w, best] += travel[v, w]
                moves += 1
                moved = True
            if not moved:
                break
    return moves
