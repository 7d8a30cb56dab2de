"""Recursive coordinate bipartitioning, used as the comparison baseline.

A stand-in for the BKNS recursive geometric approach: split along the axis
of larger spread at the prefix whose activity best matches the share owed to
the left half, then recurse.
"""
from __future__ import annotations

import numpy as np

from .core import Instance, Partition


def solve_bkns(instance: Instance) -> Partition:
    n, k = instance.n, instance.k
    coords = instance.coords
    act = instance.activity
    assign = np.zeros(n, dtype=np.int64)
    label = 0
    stack = [(np.arange(n), k)]
    while stack:
        idx, parts = stack.pop()
        if parts == 1:
            assign[idx] = label
            label += 1
            continue
        pts = coords[idx]
        spread = pts.max(axis=0) - pts.min(axis=0)
        axis = int(np.argmax(spread))
        order = idx[np.lexsort((idx, pts[:, axis]))]
        k1 = parts // 2
        k2 = parts - k1
        cum = np.cumsum(act[order])
        target = cum[-1] * k1 / parts
        # prefix sizes k1..len-k2 keep both halves able to host their territories
        window = cum[k1 - 1:len(order) - k2]
        cut = k1 + int(np.argmin(np.abs(window - target)))
        # right half pushed first so the left half is labelled first
        stack.append((order[cut:], k2))
        stack.append((order[:cut], k1))
    return Partition(assign, k)
