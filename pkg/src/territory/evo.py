"""KaTeD: steady-state evolutionary partitioning of the proximity graph.

Individuals are balanced, contiguous partitions scored by the penalised
pairwise travel-time fitness. Operators (combine, mutate) work on cuts of the
model graph; every offspring passes through the repair chain
``make_contiguous -> rebalance -> local_search`` before it may enter the
population.
"""
from __future__ import annotations

import logging
import multiprocessing as mp
import queue as queue_mod
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import kernels
from .core import (BALANCE_RTOL, Instance, Partition, balance_bound, fitness,
                   pairwise_cost)
from .graphmodel import ModelGraph

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Individual:
    partition: Partition
    fitness: float
    cut: int


@dataclass
class EvoConfig:
    population_size: int | None = None
    alpha: float = 0.1
    time_limit: float = 300.0
    seed: int = 0
    tournament_size: int = 2
    mutation_strength: float = 0.1
    mutation_rate: float = 0.5
    max_generations: int | None = None
    workers: int = 1
    migration_interval: int = 10

    def __post_init__(self):
        if self.population_size is None:
            self.population_size = max(4, 4 * self.workers)
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        if not self.time_limit > 0:
            raise ValueError("time_limit must be positive")
        if self.tournament_size < 2:
            raise ValueError("tournament_size must be >= 2")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass
class EvoStats:
    generations: int = 0
    initial_population: int = 0
    accepted_offspring: int = 0
    trajectory: list[dict] = field(default_factory=list)
    best_effort: bool = False
    workers: int = 1


class _Ctx:
    """Arrays and constants reused by every operator during one run."""

    def __init__(self, instance: Instance, graph: ModelGraph, alpha: float = 0.1):
        if graph.n != instance.n:
            raise ValueError("graph and instance sizes differ")
        self.instance = instance
        self.graph = graph
        self.alpha = alpha
        self.k = instance.k
        self.n = instance.n
        self.w = np.ascontiguousarray(instance.activity, dtype=np.float64)
        self.travel = instance.travel
        self.bound = balance_bound(instance)
        self.cap = self.bound + BALANCE_RTOL * max(abs(self.bound), 1.0)
        self.indptr = graph.indptr
        self.indices = graph.indices
        self.eu = graph.edge_u
        self.ev = graph.edge_v
        self.src = np.concatenate([self.eu, self.ev])
        self.dst = np.concatenate([self.ev, self.eu])


# ---------------------------------------------------------------- repair

def _fill_empty(a: np.ndarray, ctx: _Ctx) -> None:
    sizes = np.bincount(a, minlength=ctx.k)
    for t in np.flatnonzero(sizes == 0).tolist():
        donor = int(np.argmax(sizes))
        members = np.flatnonzero(a == donor)
        same = np.bincount(ctx.src[(a[ctx.src] == donor) & (a[ctx.dst] == donor)],
                           minlength=ctx.n)[members]
        ranked = members[np.argsort(same, kind="stable")]
        pick = int(ranked[0])
        for v in ranked[:32].tolist():
            if kernels.connected_without(ctx.indptr, ctx.indices, a, v, int(sizes[donor])):
                pick = v
                break
        a[pick] = t
        sizes[donor] -= 1
        sizes[t] += 1


def _make_contiguous(a: np.ndarray, ctx: _Ctx) -> None:
    k = ctx.k
    while True:
        _fill_empty(a, ctx)
        labels, ncomp = kernels.component_labels(ctx.indptr, ctx.indices, a)
        if ncomp == k:
            return
        comp_block = np.empty(ncomp, dtype=np.int64)
        comp_block[labels] = a
        comp_act = np.bincount(labels, weights=ctx.w, minlength=ncomp)
        # per block keep the heaviest component, ties to the first discovered
        order = np.lexsort((np.arange(ncomp), -comp_act, comp_block))
        first = np.ones(ncomp, dtype=bool)
        first[1:] = comp_block[order[1:]] != comp_block[order[:-1]]
        kept = np.zeros(ncomp, dtype=bool)
        kept[order[first]] = True

        lu, lv = labels[ctx.eu], labels[ctx.ev]
        m1 = ~kept[lu] & kept[lv]
        m2 = kept[lu] & ~kept[lv]
        xs = np.concatenate([lu[m1], lv[m2]])
        bs = np.concatenate([comp_block[lv[m1]], comp_block[lu[m2]]])
        if len(xs) == 0:
            raise RuntimeError("excess component without an adjacent territory; graph disconnected?")
        srt = np.lexsort((bs, xs))
        xs, bs = xs[srt], bs[srt]

        loads = np.bincount(a, weights=ctx.w, minlength=k)
        node_order = np.argsort(labels, kind="stable")
        starts = np.concatenate([[0], np.cumsum(np.bincount(labels, minlength=ncomp))])
        bounds = np.flatnonzero(np.concatenate([[True], xs[1:] != xs[:-1], [True]]))
        for lo, hi in zip(bounds[:-1].tolist(), bounds[1:].tolist()):
            c = int(xs[lo])
            cands = np.unique(bs[lo:hi])
            target = int(cands[np.argmin(loads[cands])])
            members = node_order[starts[c]:starts[c + 1]]
            a[members] = target
            loads[target] += comp_act[c]
            loads[comp_block[c]] -= comp_act[c]


def _excess(load, cap):
    return np.maximum(0.0, load - cap)


def _adjacent_move(a, ctx, loads, sizes, over, require_connected):
    src, dst = ctx.src, ctx.dst
    A = a[src]
    B = a[dst]
    same_cnt = np.bincount(src[A == B], minlength=ctx.n)
    mask = (A != B) & over[A] & (sizes[A] > 1)
    if not mask.any():
        return None
    x, A, B = src[mask], A[mask], B[mask]
    key, cnt = np.unique(x * ctx.k + B, return_counts=True)
    x = key // ctx.k
    B = key % ctx.k
    A = a[x]
    wx = ctx.w[x]
    LA, LB = loads[A], loads[B]
    d_exc = (_excess(LA - wx, ctx.cap) - _excess(LA, ctx.cap)
             + _excess(LB + wx, ctx.cap) - _excess(LB, ctx.cap))
    ok = (wx < LA - LB) & (d_exc <= 1e-12 * max(ctx.cap, 1.0))
    if not ok.any():
        return None
    x, B, LB, gain = x[ok], B[ok], LB[ok], (cnt - same_cnt[x])[ok]
    rank = np.lexsort((x, -gain, LB))
    if not require_connected:
        i = rank[0]
        return int(x[i]), int(B[i])
    for i in rank[:64].tolist():
        v = int(x[i])
        if kernels.connected_without(ctx.indptr, ctx.indices, a, v, int(sizes[a[v]])):
            return v, int(B[i])
    return None


def _global_move(a, ctx, loads, sizes):
    for A in np.argsort(-loads, kind="stable").tolist():
        if loads[A] <= ctx.cap or sizes[A] <= 1:
            continue
        members = np.flatnonzero(a == A)
        wm = ctx.w[members]
        for B in np.argsort(loads, kind="stable").tolist():
            if B == A:
                continue
            LA, LB = loads[A], loads[B]
            d_exc = (_excess(LA - wm, ctx.cap) - _excess(LA, ctx.cap)
                     + _excess(LB + wm, ctx.cap) - _excess(LB, ctx.cap))
            ok = (wm < LA - LB) & (d_exc <= 1e-12 * max(ctx.cap, 1.0))
            if ok.any():
                cand = np.flatnonzero(ok)
                # biggest reduction of excess, then heaviest node
                i = cand[np.lexsort((-wm[cand], d_exc[cand]))[0]]
                return int(members[i]), B
    return None


def _global_swap(a, ctx, loads, sizes):
    for A in np.argsort(-loads, kind="stable").tolist():
        if loads[A] <= ctx.cap:
            continue
        xa = np.flatnonzero(a == A)
        for B in np.argsort(loads, kind="stable").tolist():
            if B == A:
                continue
            yb = np.flatnonzero(a == B)
            diff = ctx.w[xa][:, None] - ctx.w[yb][None, :]
            LA, LB = loads[A], loads[B]
            d_exc = (_excess(LA - diff, ctx.cap) - _excess(LA, ctx.cap)
                     + _excess(LB + diff, ctx.cap) - _excess(LB, ctx.cap))
            ok = (diff > 0) & (diff < LA - LB) & (d_exc <= 1e-12 * max(ctx.cap, 1.0))
            if ok.any():
                flat = np.flatnonzero(ok.ravel())
                i = flat[np.argmin(d_exc.ravel()[flat])]
                r, c = divmod(int(i), len(yb))
                return int(xa[r]), int(yb[c]), A, B
    return None


def _shift_candidates(a, ctx, X, Y):
    """Nodes of block X with a neighbour in block Y."""
    m = (a[ctx.src] == X) & (a[ctx.dst] == Y)
    return np.unique(ctx.src[m])


def _chain(a, ctx, loads, sizes, A) -> bool:
    """Move load out of block A along a path of adjacent blocks to one with spare capacity.

    Nodes shift one hop each, starting at the receiving end; each donor keeps
    its connectivity and no block on the path gains excess, so the total
    excess drops by the amount leaving A.
    """
    k, cap = ctx.k, ctx.cap
    cut = a[ctx.src] != a[ctx.dst]
    keys = a[ctx.src[cut]] * k + a[ctx.dst[cut]]
    # lightest node that could cross each block pair
    minw = np.full(k * k, np.inf)
    np.minimum.at(minw, keys, ctx.w[ctx.src[cut]])
    minw = minw.reshape(k, k)
    pairs = np.unique(keys)
    adj = [[] for _ in range(k)]
    for x, y in zip((pairs // k).tolist(), (pairs % k).tolist()):
        adj[x].append(y)
    banned: set[tuple[int, int]] = set()
    for _ in range(16):
        # BFS towards the nearest block with spare room, lighter blocks first
        prev = {A: -1}
        queue = [A]
        goal = -1
        head = 0
        while head < len(queue) and goal < 0:
            x = queue[head]
            head += 1
            for y in sorted(adj[x], key=lambda t: (loads[t], t)):
                if y in prev or (x, y) in banned:
                    continue
                prev[y] = x
                if loads[y] + minw[x, y] <= cap:
                    goal = y
                    break
                queue.append(y)
        if goal < 0:
            return False
        path = [goal]
        while prev[path[-1]] >= 0:
            path.append(prev[path[-1]])
        path.reverse()  # A, ..., goal
        want = min(loads[A] - cap, cap - loads[goal])
        done = []  # (node, from, to) for rollback
        w_out = None
        failed = None
        for i in range(len(path) - 1, 0, -1):
            X, Y = path[i - 1], path[i]
            if w_out is None:
                limit, target = cap - loads[Y], want
            else:
                limit, target = w_out + max(0.0, cap - loads[Y]), w_out
            cand = _shift_candidates(a, ctx, X, Y)
            wc = ctx.w[cand]
            keep = (wc <= limit) & (sizes[X] > 1)
            if X == A:
                keep &= wc > 0
            cand, wc = cand[keep], wc[keep]
            pick = -1
            for j in np.lexsort((cand, np.abs(wc - target))).tolist()[:32]:
                v = int(cand[j])
                if kernels.connected_without(ctx.indptr, ctx.indices, a, v, int(sizes[X])):
                    pick = v
                    break
            if pick < 0:
                failed = (X, Y)
                break
            a[pick] = Y
            loads[X] -= ctx.w[pick]
            loads[Y] += ctx.w[pick]
            sizes[X] -= 1
            sizes[Y] += 1
            done.append((pick, X, Y))
            w_out = ctx.w[pick]
        if failed is None:
            return True
        for v, X, Y in reversed(done):
            a[v] = X
            loads[X] += ctx.w[v]
            loads[Y] -= ctx.w[v]
            sizes[X] += 1
            sizes[Y] -= 1
        banned.add(failed)
    return False


def _rebalance(a: np.ndarray, ctx: _Ctx, connected_only: bool = False) -> bool:
    """Shift load out of overloaded blocks; returns whether the result is balanced.

    Chain moves that keep every block connected come first. Unless
    ``connected_only`` is set, single moves that may split the donor, global
    moves and swaps follow, then a bounded packing search. Every accepted step lowers the total excess or,
    failing that, the sum of squared loads, so the loop terminates.
    """
    k = ctx.k
    loads = np.bincount(a, weights=ctx.w, minlength=k)
    sizes = np.bincount(a, minlength=k)
    stuck: set[int] = set()
    for _ in range(20 * ctx.n + 100):
        over = loads > ctx.cap
        if not over.any():
            return True
        order = [int(t) for t in np.argsort(-loads, kind="stable") if over[t] and t not in stuck]
        if order:
            if _chain(a, ctx, loads, sizes, order[0]):
                stuck.clear()
            else:
                stuck.add(order[0])
            continue
        stuck.clear()
        if connected_only:
            return False
        move = _adjacent_move(a, ctx, loads, sizes, over, require_connected=False)
        if move is None:
            move = _global_move(a, ctx, loads, sizes)
        if move is None:
            swap = _global_swap(a, ctx, loads, sizes)
            if swap is None:
                return _pack(a, ctx)
            x, y, A, B = swap
            a[x], a[y] = B, A
            delta = ctx.w[x] - ctx.w[y]
            loads[A] -= delta
            loads[B] += delta
            continue
        v, B = move
        A = a[v]
        a[v] = B
        loads[A] -= ctx.w[v]
        loads[B] += ctx.w[v]
        sizes[A] -= 1
        sizes[B] += 1
    return bool((loads <= ctx.cap).all()) or (not connected_only and _pack(a, ctx))


def _pack(a: np.ndarray, ctx: _Ctx, budget: int = 50_000) -> bool:
    """Last resort: depth-first reassignment under the capacities only.

    Areas go heaviest first, each trying its current block before the emptiest
    others, so the result stays close to ``a``. Exhaustive on small instances;
    gives up after ``budget`` steps. ``a`` is changed only on success.
    """
    n, k, cap = ctx.n, ctx.k, ctx.cap
    order = np.lexsort((np.arange(n), -ctx.w))
    w = ctx.w[order].tolist()
    cur = a[order].tolist()
    load = [0.0] * k
    choice = [0] * n
    opts: list[list[int] | None] = [None] * n
    i = steps = 0
    while 0 <= i < n:
        steps += 1
        if steps > budget:
            return False
        if opts[i] is None:
            rest = sorted((b for b in range(k) if b != cur[i]), key=lambda b: (load[b], b))
            opts[i] = [b for b in [cur[i], *rest] if load[b] + w[i] <= cap]
        else:
            load[choice[i]] -= w[i]
        if opts[i]:
            choice[i] = opts[i].pop(0)
            load[choice[i]] += w[i]
            i += 1
        else:
            opts[i] = None
            i -= 1
    if i < 0:
        return False
    a[order] = choice
    return True


def _local_search(a: np.ndarray, ctx: _Ctx) -> int:
    """Single-node moves to a local optimum, then pair swaps when moves are blocked by balance."""
    k = ctx.k
    onehot = np.zeros((ctx.n, k))
    onehot[np.arange(ctx.n), a] = 1.0
    sums = np.ascontiguousarray(ctx.travel @ onehot)
    loads = np.bincount(a, weights=ctx.w, minlength=k)
    sizes = np.bincount(a, minlength=k).astype(np.int64)
    total = 0
    for _ in range(1000):
        total += kernels.local_search(ctx.indptr, ctx.indices, ctx.travel, a, ctx.w, loads,
                                      sizes, sums, ctx.cap, 1_000_000)
        swaps = _swap(a, ctx, sums, loads)
        if not swaps:
            break
        total += 2 * swaps
    return total


def _swap(a: np.ndarray, ctx: _Ctx, sums: np.ndarray, loads: np.ndarray) -> int:
    """Exchange boundary nodes between adjacent blocks where that lowers the cut.

    An exchange must keep the balance, both blocks connected and must not
    raise the pairwise cost. At most one exchange per block per call, since
    the candidate data goes stale afterwards. Returns the number made.
    """
    k, src, dst = ctx.k, ctx.src, ctx.dst
    cross = a[src] != a[dst]
    if not cross.any():
        return 0
    cnt = np.bincount(src * k + a[dst], minlength=ctx.n * k).reshape(ctx.n, k)
    own = cnt[np.arange(ctx.n), a]
    _, ncomp = kernels.component_labels(ctx.indptr, ctx.indices, a)
    cs, cd = src[cross], dst[cross]
    key = a[cs] * k + a[cd]
    order = np.argsort(key, kind="stable")
    cs, cd, key = cs[order], cd[order], key[order]
    pairs, first, counts = np.unique(key, return_index=True, return_counts=True)
    where = dict(zip(pairs.tolist(), zip(first.tolist(), counts.tolist())))
    dirty = np.zeros(k, dtype=bool)
    made = 0
    for pk in pairs.tolist():
        A, B = divmod(pk, k)
        if A > B or dirty[A] or dirty[B]:
            continue
        lo, c = where[pk]
        es, ed = cs[lo:lo + c], cd[lo:lo + c]  # edges from A into B
        V = np.unique(es)
        U = np.unique(ed)
        gv = cnt[V, B] - own[V]
        gu = cnt[U, A] - own[U]
        if gv.max() + gu.max() <= 0:
            continue
        adj = np.zeros((len(V), len(U)), dtype=np.int64)
        adj[np.searchsorted(V, es), np.searchsorted(U, ed)] = 1
        gain = gv[:, None] + gu[None, :] - 2 * adj
        dw = ctx.w[V][:, None] - ctx.w[U][None, :]
        delta = ((sums[V, B] - sums[V, A])[:, None] + (sums[U, A] - sums[U, B])[None, :]
                 - 2.0 * ctx.travel[np.ix_(V, U)])
        ok = ((gain > 0) & (loads[A] - dw <= ctx.cap) & (loads[B] + dw <= ctx.cap)
              & (delta <= 0.0))
        if not ok.any():
            continue
        flat = np.flatnonzero(ok.ravel())
        flat = flat[np.lexsort((flat, delta.ravel()[flat], -gain.ravel()[flat]))]
        for f in flat[:16].tolist():
            v, u = int(V[f // len(U)]), int(U[f % len(U)])
            a[v], a[u] = B, A
            _, nc = kernels.component_labels(ctx.indptr, ctx.indices, a)
            if nc == ncomp:
                d = ctx.w[v] - ctx.w[u]
                loads[A] -= d
                loads[B] += d
                sums[:, A] += ctx.travel[u] - ctx.travel[v]
                sums[:, B] += ctx.travel[v] - ctx.travel[u]
                dirty[A] = dirty[B] = True
                made += 1
                break
            a[v], a[u] = A, B
    return made


def _is_feasible(a: np.ndarray, ctx: _Ctx) -> bool:
    loads = np.bincount(a, weights=ctx.w, minlength=ctx.k)
    if (loads > ctx.cap).any():
        return False
    _, ncomp = kernels.component_labels(ctx.indptr, ctx.indices, a)
    return ncomp == ctx.k and len(np.unique(a)) == ctx.k


def _repair(a: np.ndarray, ctx: _Ctx) -> bool:
    """Contiguity repair then rebalancing, repeated while rebalancing breaks blocks apart."""
    for _ in range(4):
        _make_contiguous(a, ctx)
        balanced = _rebalance(a, ctx)
        _, ncomp = kernels.component_labels(ctx.indptr, ctx.indices, a)
        if ncomp == ctx.k and balanced:
            return True
        if ncomp == ctx.k:
            return False
    return _is_feasible(a, ctx)


def _finish(a: np.ndarray, ctx: _Ctx) -> Individual | None:
    if not _repair(a, ctx):
        return None
    _local_search(a, ctx)
    return _individual(a, ctx)


def _individual(a: np.ndarray, ctx: _Ctx) -> Individual:
    p = Partition(a, ctx.k)
    cut = int(np.count_nonzero(a[ctx.eu] != a[ctx.ev]))
    return Individual(p, fitness(p, ctx.instance, ctx.graph, ctx.alpha), cut)


# ------------------------------------------------------ public operators

def make_contiguous(partition: Partition, graph: ModelGraph, instance: Instance) -> Partition:
    a = partition.assignment.copy()
    _make_contiguous(a, _Ctx(instance, graph))
    return Partition(a, partition.k)


def rebalance(partition: Partition, graph: ModelGraph, instance: Instance,
              connected_only: bool = False) -> tuple[Partition, bool]:
    """Move boundary nodes out of overloaded blocks.

    Returns the new partition and whether it is balanced. Moves that keep the
    donor connected are tried first; unless ``connected_only`` is set, other
    moves and swaps follow when those run out.
    """
    a = partition.assignment.copy()
    ok = _rebalance(a, _Ctx(instance, graph), connected_only)
    return Partition(a, partition.k), ok


def local_search(partition: Partition, graph: ModelGraph, instance: Instance) -> Partition:
    """Single-node boundary moves that strictly reduce the unit-weight cut.

    A move must also keep the balance, keep the donor block connected and
    must not raise the pairwise travel cost.
    """
    a = partition.assignment.copy()
    _local_search(a, _Ctx(instance, graph))
    return Partition(a, partition.k)


def initial_partition(graph: ModelGraph, instance: Instance, rng: np.random.Generator,
                      ctx: _Ctx | None = None) -> Partition:
    """Randomised recursive bisection, then repair and local search."""
    ctx = ctx or _Ctx(instance, graph)
    a = _grow(ctx, rng)
    if _repair(a, ctx):
        _local_search(a, ctx)
    return Partition(a, ctx.k)


def _grow(ctx: _Ctx, rng: np.random.Generator) -> np.ndarray:
    """Recursive bisection along random directions, cut where activity matches the share.

    Blocks come out balanced up to one area per level; contiguity on the
    model graph is left to the repair step.
    """
    coords = ctx.instance.coords
    a = np.zeros(ctx.n, dtype=np.int64)
    stack = [(np.arange(ctx.n), ctx.k, 0)]
    while stack:
        idx, parts, label = stack.pop()
        if parts == 1:
            a[idx] = label
            continue
        theta = rng.uniform(0.0, np.pi)
        proj = coords[idx] @ np.array([np.cos(theta), np.sin(theta)])
        order = idx[np.lexsort((idx, proj))]
        k1 = parts // 2
        k2 = parts - k1
        cum = np.cumsum(ctx.w[order])
        window = cum[k1 - 1:len(order) - k2]
        cut = k1 + int(np.argmin(np.abs(window - cum[-1] * k1 / parts)))
        stack.append((order[cut:], k2, label + k1))
        stack.append((order[:cut], k1, label))
    return a


def _combine_projection(a1: np.ndarray, a2: np.ndarray, ctx: _Ctx,
                        rng: np.random.Generator) -> np.ndarray:
    """Overlay of two parents, greedily re-partitioned on the cell quotient graph.

    ``a1`` seeds the territories. Returned before any repair, so every cut
    edge of the result is a cut edge of ``a1`` or ``a2``.
    """
    k = ctx.k
    labels, ncell = kernels.component_labels(ctx.indptr, ctx.indices, a1 * k + a2)
    cell_w = np.bincount(labels, weights=ctx.w, minlength=ncell)
    cell_b1 = np.empty(ncell, dtype=np.int64)
    cell_b1[labels] = a1
    lu, lv = labels[ctx.eu], labels[ctx.ev]
    m = lu != lv
    qkey, qw = np.unique(np.minimum(lu[m], lv[m]) * ncell + np.maximum(lu[m], lv[m]),
                         return_counts=True)
    qu, qv = qkey // ncell, qkey % ncell
    qsrc = np.concatenate([qu, qv])
    qdst = np.concatenate([qv, qu])
    qwt = np.concatenate([qw, qw]).astype(float)
    order = np.argsort(qsrc, kind="stable")
    qdst, qwt = qdst[order], qwt[order]
    qptr = np.concatenate([[0], np.cumsum(np.bincount(qsrc, minlength=ncell))])

    cell_a = np.full(ncell, -1, dtype=np.int64)
    noise = rng.random(ncell)
    for t in range(k):
        cells = np.flatnonzero(cell_b1 == t)
        seed = cells[np.lexsort((noise[cells], -cell_w[cells]))[0]]
        cell_a[seed] = t
    loads = np.zeros(k)
    np.add.at(loads, cell_a[cell_a >= 0], cell_w[cell_a >= 0])
    conn = np.zeros((k, ncell))
    for c in np.flatnonzero(cell_a >= 0).tolist():
        conn[cell_a[c], qdst[qptr[c]:qptr[c + 1]]] += qwt[qptr[c]:qptr[c + 1]]
    free = cell_a < 0
    alive = np.ones(k, dtype=bool)
    while free.any():
        picked = False
        for t in np.lexsort((np.arange(k), loads)).tolist():
            if not alive[t]:
                continue
            cand = np.flatnonzero((conn[t] > 0) & free)
            if len(cand) == 0:
                alive[t] = False
                continue
            c = int(cand[np.lexsort((noise[cand], -conn[t, cand]))[0]])
            cell_a[c] = t
            free[c] = False
            loads[t] += cell_w[c]
            conn[t, qdst[qptr[c]:qptr[c + 1]]] += qwt[qptr[c]:qptr[c + 1]]
            picked = True
            break
        if not picked:
            cell_a[free] = cell_b1[free]
            break
    return cell_a[labels]


def combine(parent1: Individual, parent2: Individual, graph: ModelGraph, instance: Instance,
            rng: np.random.Generator, ctx: _Ctx | None = None) -> Individual:
    ctx = ctx or _Ctx(instance, graph)
    better, other = sorted((parent1, parent2), key=lambda p: p.fitness)
    a = _combine_projection(better.partition.assignment, other.partition.assignment, ctx, rng)
    child = _finish(a, ctx)
    return child if child is not None else better


def mutate(individual: Individual, graph: ModelGraph, instance: Instance,
           rng: np.random.Generator, strength: float = 0.1,
           ctx: _Ctx | None = None) -> Individual:
    """Push a connected patch of boundary nodes into a neighbouring block."""
    if strength <= 0:
        return individual
    ctx = ctx or _Ctx(instance, graph)
    a = individual.partition.assignment.copy()
    cross = a[ctx.src] != a[ctx.dst]
    boundary = np.unique(ctx.src[cross])
    if len(boundary) == 0:
        return individual
    size = int(rng.binomial(len(boundary), min(strength, 1.0)))
    if size == 0:
        return individual
    v0 = int(boundary[rng.integers(len(boundary))])
    home = a[v0]
    targets = np.unique(a[ctx.dst[(ctx.src == v0) & cross]])
    target = int(targets[rng.integers(len(targets))])
    on_boundary = np.zeros(ctx.n, dtype=bool)
    on_boundary[boundary] = True
    limit = min(size, int(np.count_nonzero(a == home)) - 1)
    if limit < 1:
        return individual
    patch = [v0]
    seen = {v0}
    head = 0
    while head < len(patch) and len(patch) < limit:
        u = patch[head]
        head += 1
        for w in ctx.indices[ctx.indptr[u]:ctx.indptr[u + 1]].tolist():
            if w not in seen and a[w] == home and on_boundary[w]:
                seen.add(w)
                patch.append(w)
                if len(patch) >= limit:
                    break
    a[patch] = target
    child = _finish(a, ctx)
    return child if child is not None else individual


# ------------------------------------------------------------- main loop

def _tournament(pop: list[Individual], rng: np.random.Generator, size: int,
                exclude: int | None = None) -> int:
    pool = [i for i in range(len(pop)) if i != exclude] or [0]
    idx = rng.choice(len(pool), size=min(size, len(pool)), replace=False)
    return min((pool[i] for i in idx.tolist()), key=lambda i: (pop[i].fitness, i))


def _same(p: Individual, q: Individual) -> bool:
    return p.partition.canonical() == q.partition.canonical()


class _Evolution:
    def __init__(self, instance, graph, config: EvoConfig, seed: int,
                 on_log: Callable[[dict], None] | None = None):
        self.ctx = _Ctx(instance, graph, config.alpha)
        self.config = config
        self.rng = np.random.default_rng(seed)
        self.pop: list[Individual] = []
        self.best: Individual | None = None
        self.fallback: Individual | None = None
        self.stats = EvoStats()
        self.on_log = on_log
        self.t0 = time.perf_counter()

    def elapsed(self) -> float:
        return time.perf_counter() - self.t0

    def out_of_time(self) -> bool:
        return self.elapsed() >= self.config.time_limit

    def offer(self, child: Individual) -> bool:
        if not _is_feasible(child.partition.assignment, self.ctx):
            return False
        if self.best is None or child.fitness < self.best.fitness:
            self.best = child
        if len(self.pop) < self.config.population_size:
            if any(_same(child, p) for p in self.pop):
                return False
            self.pop.append(child)
            return True
        worst = max(range(len(self.pop)), key=lambda i: (self.pop[i].fitness, i))
        if child.fitness < self.pop[worst].fitness and not any(_same(child, p) for p in self.pop):
            self.pop[worst] = child
            return True
        return False

    def populate(self) -> None:
        ctx = self.ctx
        attempts = 0
        while len(self.pop) < self.config.population_size:
            if self.pop and self.out_of_time():
                break
            if attempts >= 4 * self.config.population_size and (self.pop or self.fallback):
                break
            attempts += 1
            p = initial_partition(ctx.graph, ctx.instance, self.rng, ctx)
            ind = _individual(p.assignment.copy(), ctx)
            if not self.offer(ind):
                if self.fallback is None or ind.fitness < self.fallback.fitness:
                    self.fallback = ind
            if self.out_of_time() and (self.pop or self.fallback):
                break
        self.stats.initial_population = len(self.pop)
        self.stats.best_effort = len(self.pop) < self.config.population_size
        self._record()

    def _record(self) -> None:
        if self.best is None:
            return
        entry = {"generation": self.stats.generations, "best_fitness": self.best.fitness,
                 "best_cut": self.best.cut, "wall_seconds": round(self.elapsed(), 6)}
        self.stats.trajectory.append(entry)
        if self.on_log is not None:
            self.on_log(entry)

    def step(self) -> None:
        cfg, ctx, rng = self.config, self.ctx, self.rng
        i = _tournament(self.pop, rng, cfg.tournament_size)
        j = _tournament(self.pop, rng, cfg.tournament_size, exclude=i)
        child = combine(self.pop[i], self.pop[j], ctx.graph, ctx.instance, rng, ctx)
        if rng.random() < cfg.mutation_rate:
            child = mutate(child, ctx.graph, ctx.instance, rng, cfg.mutation_strength, ctx)
        if self.offer(child):
            self.stats.accepted_offspring += 1
        self.stats.generations += 1
        self._record()

    def done(self) -> bool:
        cfg = self.config
        if cfg.max_generations is not None and self.stats.generations >= cfg.max_generations:
            return True
        return self.out_of_time()


def _single_territory(instance: Instance, graph: ModelGraph, alpha: float):
    p = Partition(np.zeros(instance.n, dtype=np.int64), 1)
    return Individual(p, fitness(p, instance, graph, alpha), 0), EvoStats()


def solve_kated(instance: Instance, graph: ModelGraph, config: EvoConfig | None = None,
                on_log: Callable[[dict], None] | None = None) -> tuple[Individual, EvoStats]:
    """Run the evolutionary loop and return the fittest feasible individual seen."""
    config = config or EvoConfig()
    if instance.k == 1:
        return _single_territory(instance, graph, config.alpha)
    if config.workers > 1:
        return _solve_islands(instance, graph, config, on_log)
    evo = _Evolution(instance, graph, config, config.seed, on_log)
    evo.populate()
    if not evo.pop:
        log.warning("no feasible individual found; returning best-effort partition")
        evo.stats.best_effort = True
        return evo.fallback, evo.stats
    while not evo.done():
        evo.step()
    return evo.best, evo.stats


# --------------------------------------------------------------- islands

def _island(wid, instance, graph, config, seed, inboxes, results):
    for box in inboxes:
        box.cancel_join_thread()  # undelivered migrants must not block exit
    evo = _Evolution(instance, graph, config, seed)
    evo.populate()
    while evo.pop and not evo.done():
        evo.step()
        if evo.stats.generations % config.migration_interval == 0:
            for j, box in enumerate(inboxes):
                if j != wid:
                    box.put(evo.best.partition.assignment)
            while True:
                try:
                    incoming = inboxes[wid].get_nowait()
                except queue_mod.Empty:
                    break
                evo.offer(_individual(np.array(incoming, dtype=np.int64), evo.ctx))
    best = evo.best or evo.fallback
    results.put((wid, best.partition.assignment, evo.stats))


def _solve_islands(instance, graph, config: EvoConfig, on_log):
    try:
        ctx = mp.get_context("fork")
    except ValueError:
        ctx = mp.get_context()
    inboxes = [ctx.Queue() for _ in range(config.workers)]
    results = ctx.Queue()
    seeds = np.random.SeedSequence(config.seed).spawn(config.workers)
    procs = []
    for wid in range(config.workers):
        s = int(seeds[wid].generate_state(1)[0])
        p = ctx.Process(target=_island, args=(wid, instance, graph, config, s, inboxes,
                                              results), daemon=True)
        p.start()
        procs.append(p)
    collected = [results.get() for _ in procs]
    for p in procs:
        p.join()
    c = _Ctx(instance, graph, config.alpha)
    best, stats = None, EvoStats(workers=config.workers)
    for wid, assign, st in sorted(collected, key=lambda r: r[0]):
        ind = _individual(np.array(assign, dtype=np.int64), c)
        stats.generations += st.generations
        stats.accepted_offspring += st.accepted_offspring
        stats.initial_population += st.initial_population
        stats.best_effort |= st.best_effort
        feasible = _is_feasible(ind.partition.assignment, c)
        key = (not feasible, ind.fitness)
        if best is None or key < best[0]:
            best = (key, ind, st)
    stats.trajectory = best[2].trajectory
    if on_log is not None:
        for entry in stats.trajectory:
            on_log(entry)
    return best[1], stats
