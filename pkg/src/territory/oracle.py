"""Exhaustive ground truth for tiny instances."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from . import kernels
from .core import BALANCE_RTOL, Instance, Partition, balance_bound, within
from .graphmodel import ModelGraph

MAX_N = 14
MAX_K = 4
OBJECTIVES = ("pairwise", "fitness", "compactness")


class OracleTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class OracleResult:
    partition: Partition | None
    value: float
    examined: int
    balanced_count: int

    @property
    def feasible(self) -> bool:
        return self.partition is not None


def restricted_growth_strings(n: int, k: int) -> np.ndarray:
    """All assignments of ``n`` items to exactly ``k`` unlabeled blocks.

    Canonical form: block ids appear in order of first use, so each set
    partition is produced once (``S(n, k)`` rows).
    """
    if n == 0:
        return np.zeros((1 if k == 0 else 0, 0), dtype=np.int8)
    rows = np.zeros((1, 1), dtype=np.int8)
    top = np.zeros(1, dtype=np.int8)
    for t in range(1, n):
        choices = np.minimum(top + 1, k - 1) + 1
        rep = np.repeat(rows, choices, axis=0)
        starts = np.repeat(np.cumsum(choices) - choices, choices)
        vals = (np.arange(len(rep)) - starts).astype(np.int8)
        top = np.maximum(np.repeat(top, choices), vals)
        rows = np.column_stack([rep, vals])
        # drop prefixes that can no longer open all k blocks
        keep = top.astype(np.int64) + 1 + (n - 1 - t) >= k
        rows, top = rows[keep], top[keep]
    return rows[top == k - 1]


def _check_size(n: int, k: int) -> None:
    if n > MAX_N or k > MAX_K:
        raise OracleTooLarge(f"oracle limited to n <= {MAX_N}, k <= {MAX_K}; got n={n}, k={k}")


def _chunks(rows: np.ndarray, size: int = 200_000) -> Iterator[np.ndarray]:
    for s in range(0, len(rows), size):
        yield rows[s:s + size]


def enumerate_optimum(instance: Instance, graph: ModelGraph | None = None,
                      objective: str = "pairwise", centers: Sequence[int] | None = None,
                      alpha: float = 0.1) -> OracleResult:
    """Best feasible partition by brute force.

    ``pairwise`` and ``fitness`` range over balanced partitions that are
    contiguous on ``graph`` (no contiguity filter when ``graph`` is None); on
    that set the two objectives coincide. ``compactness`` fixes ``centers``,
    keeps each center's own area at its center, and applies the allocation
    cap ``(1 + eps) * a(B) / k``.
    """
    if objective not in OBJECTIVES:
        raise ValueError(f"objective must be one of {OBJECTIVES}")
    if objective == "compactness":
        if centers is None:
            raise ValueError("compactness needs a center set")
        return _compactness_optimum(instance, list(centers))
    n, k = instance.n, instance.k
    _check_size(n, k)
    rows = restricted_growth_strings(n, k)
    bound = balance_bound(instance)
    iu, iv = np.triu_indices(n, 1)
    d = instance.travel[iu, iv]
    cands, costs = [], []
    for chunk in _chunks(rows):
        loads = np.stack([(chunk == t) @ instance.activity for t in range(k)], axis=1)
        ok = within(loads.max(axis=1), bound)
        sub = chunk[ok]
        cost = (sub[:, iu] == sub[:, iv]).astype(float) @ d
        cands.append(sub)
        costs.append(cost)
    cand = np.concatenate(cands) if cands else np.zeros((0, n), dtype=np.int8)
    cost = np.concatenate(costs) if costs else np.zeros(0)
    # cheapest first; the first contiguous candidate is optimal
    for r in np.argsort(cost, kind="stable").tolist():
        a = cand[r].astype(np.int64)
        if graph is not None:
            _, ncomp = kernels.component_labels(graph.indptr, graph.indices, a)
            if ncomp != k:
                continue
        return OracleResult(Partition(a, k), float(cost[r]), len(rows), len(cand))
    return OracleResult(None, float("inf"), len(rows), len(cand))


def _compactness_optimum(instance: Instance, centers: list[int]) -> OracleResult:
    n = instance.n
    k = len(centers)
    _check_size(n, k)
    c = np.array(centers, dtype=np.int64)
    cost = instance.travel[:, c] ** 2 * instance.activity[:, None]
    cap = (1.0 + instance.epsilon) * instance.total_activity / k
    capt = cap + BALANCE_RTOL * max(abs(cap), 1.0)
    free = np.setdiff1d(np.arange(n), c)
    grids = np.indices((k,) * len(free)).reshape(len(free), -1).T if len(free) else np.zeros((1, 0), dtype=int)
    assign = np.empty((len(grids), n), dtype=np.int64)
    assign[:, c] = np.arange(k)
    assign[:, free] = grids
    loads = np.stack([(assign == j) @ instance.activity for j in range(k)], axis=1)
    ok = (loads <= capt).all(axis=1)
    total = cost[np.arange(n)[None, :], assign].sum(axis=1)
    if not ok.any():
        return OracleResult(None, float("inf"), len(assign), 0)
    # a(center) > cap leaves no feasible row; the check above covers it
    masked = np.where(ok, total, np.inf)
    r = int(np.argmin(masked))
    return OracleResult(Partition(assign[r], k), float(total[r]), len(assign), int(ok.sum()))
