"""Pure-Python twins of the compiled kernels in ``_ckernels.pyx``.

Every function here returns bit-identical results to its compiled
counterpart; ``tests/test_kernels.py`` checks that on random inputs.
"""
from __future__ import annotations

from collections import deque

import numpy as np


def _find(parent: list[int], x: int) -> int:
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


def kruskal_pass(n: int, eu: np.ndarray, ev: np.ndarray):
    mask = np.zeros(len(eu), dtype=bool)
    parent = list(range(n))
    size = [1] * n
    joined = 0
    for e, (u, v) in enumerate(zip(eu.tolist(), ev.tolist())):
        if joined >= n - 1:
            break
        ru, rv = _find(parent, u), _find(parent, v)
        if ru == rv:
            continue
        if size[ru] < size[rv]:
            ru, rv = rv, ru
        parent[rv] = ru
        size[ru] += size[rv]
        mask[e] = True
        joined += 1
    return mask, joined


def degree_pass(eu: np.ndarray, ev: np.ndarray, deg: np.ndarray, gamma: int) -> np.ndarray:
    mask = np.zeros(len(eu), dtype=bool)
    d = deg.tolist()
    for e, (u, v) in enumerate(zip(eu.tolist(), ev.tolist())):
        if d[u] < gamma and d[v] < gamma:
            d[u] += 1
            d[v] += 1
            mask[e] = True
    deg[:] = d
    return mask


def component_labels(indptr: np.ndarray, indices: np.ndarray, assign: np.ndarray):
    n = len(assign)
    labels = np.full(n, -1, dtype=np.int64)
    ptr = indptr.tolist()
    nbr = indices.tolist()
    blk = assign.tolist()
    lab = labels.tolist()
    ncomp = 0
    for s in range(n):
        if lab[s] != -1:
            continue
        b = blk[s]
        lab[s] = ncomp
        queue = [s]
        head = 0
        while head < len(queue):
            u = queue[head]
            head += 1
            for w in nbr[ptr[u]:ptr[u + 1]]:
                if lab[w] == -1 and blk[w] == b:
                    lab[w] = ncomp
                    queue.append(w)
        ncomp += 1
    labels[:] = lab
    return labels, ncomp


def connected_without(indptr, indices, assign, v: int, size: int) -> bool:
    if size <= 2:
        return True
    blk = assign[v]
    nbrs = indices[indptr[v]:indptr[v + 1]]
    same = nbrs[assign[nbrs] == blk]
    if len(same) == 0:
        return False
    seen = {int(v), int(same[0])}
    queue = deque([int(same[0])])
    while queue:
        u = queue.popleft()
        for w in indices[indptr[u]:indptr[u + 1]].tolist():
            if w not in seen and assign[w] == blk:
                seen.add(w)
                queue.append(w)
    return len(seen) - 1 == size - 1


def pairwise_cost(travel: np.ndarray, assign: np.ndarray) -> float:
    # row-by-row accumulation in the same order as the compiled loop
    n = len(assign)
    total = 0.0
    for i in range(n):
        a = assign[i]
        row = 0.0
        same = np.flatnonzero(assign[i + 1:] == a) + i + 1
        for x in travel[i, same].tolist():
            row += x
        total += row
    return total


def local_search(indptr, indices, travel, assign, weight, loads, sizes, sums,
                 cap: float, max_rounds: int) -> int:
    n = len(assign)
    ptr = indptr.tolist()
    nbr = indices.tolist()
    moves = 0
    rounds = 0
    while rounds < max_rounds:
        rounds += 1
        moved = False
        for v in range(n):
            a = int(assign[v])
            if sizes[a] <= 1:
                continue
            cnt: dict[int, int] = {}
            for w in nbr[ptr[v]:ptr[v + 1]]:
                t = int(assign[w])
                cnt[t] = cnt.get(t, 0) + 1
            own = cnt.get(a, 0)
            wv = float(weight[v])
            best, best_gain, best_delta = -1, 0, 0.0
            for b, c in cnt.items():
                if b == a:
                    continue
                gain = c - own
                if gain <= 0 or loads[b] + wv > cap:
                    continue
                delta = float(sums[v, b] - sums[v, a])
                if delta > 0.0:
                    continue
                if (best == -1 or gain > best_gain
                        or (gain == best_gain and (delta < best_delta
                            or (delta == best_delta and b < best)))):
                    best, best_gain, best_delta = b, gain, delta
            if best == -1:
                continue
            if not connected_without(indptr, indices, assign, v, int(sizes[a])):
                continue
            assign[v] = best
            loads[a] -= wv
            loads[best] += wv
            sizes[a] -= 1
            sizes[best] += 1
            sums[:, a] -= travel[v]
            sums[:, best] += travel[v]
            moves += 1
            moved = True
        if not moved:
            break
    return moves
